#pragma once

#include <functional>
#include <memory>
#include <span>

#include "envlab/grid.hpp"
#include "envlab/types.hpp"

namespace envlab {

/// Complex samples of a function on a TorusGrid together with its spectrum
/// u_hat_j = (1/n) sum_m u(x_m) exp(-i xi_j x_m).
///
/// A Field is an immutable value. It is built from one view (physical or
/// spectral); the other view is computed on first access and cached, which
/// is safe under concurrent readers. Copies share storage.
///
/// Real-flagged fields have real samples and conjugate-symmetric spectra.
class Field {
 public:
  static Field from_values(const TorusGrid& grid, std::span<const cplx> values);
  static Field from_real_values(const TorusGrid& grid, std::span<const double> values);
  static Field from_spectrum(const TorusGrid& grid, std::span<const cplx> spectrum);
  /// Spectrum of a real function; enforces conjugate symmetry and a real
  /// Nyquist coefficient by symmetrizing the input.
  static Field from_real_spectrum(const TorusGrid& grid, std::span<const cplx> spectrum);
  static Field zeros(const TorusGrid& grid, bool real = true);
  static Field sample(const TorusGrid& grid, const std::function<cplx(double)>& fn);
  static Field sample_real(const TorusGrid& grid, const std::function<double(double)>& fn);
  /// Take ownership of an already-built buffer (no copy).
  static Field adopt_values(const TorusGrid& grid, ComplexVector values, bool real);
  static Field adopt_spectrum(const TorusGrid& grid, ComplexVector spectrum, bool real);
  /// amplitude * exp(i xi_j x) for wavenumber j.
  static Field mode(const TorusGrid& grid, long j, cplx amplitude = 1.0);

  const TorusGrid& grid() const noexcept;
  std::size_t size() const noexcept { return grid().size(); }
  bool is_real() const noexcept;

  std::span<const cplx> values() const;
  std::span<const cplx> spectrum() const;

  /// Pointwise real part, flagged real.
  Field real_part() const;
  Field imag_part() const;
  Field conj() const;

  Field operator+(const Field& other) const;
  Field operator-(const Field& other) const;
  Field operator*(double scale) const;
  Field operator*(cplx scale) const;

 private:
  struct Impl;
  explicit Field(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

  std::shared_ptr<const Impl> impl_;
};

/// Throws std::invalid_argument unless both fields live on the same grid.
void require_same_grid(const Field& a, const Field& b, const char* where);

}  // namespace envlab
