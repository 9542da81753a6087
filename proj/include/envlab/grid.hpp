#pragma once

#include <cstddef>
#include <optional>

namespace envlab {

/// Periodic domain [0, L) with L = 2*pi*P sampled at n (power of two) nodes.
///
/// Spectral index idx in [0, n) stores wavenumber j = idx for idx < n/2 and
/// j = idx - n otherwise, i.e. j in {-n/2, ..., n/2 - 1}; the frequency is
/// xi_j = 2*pi*j/L = j/P.
class TorusGrid {
 public:
  TorusGrid(double length, std::size_t n);

  /// Grid on [0, 2*pi*periods).
  static TorusGrid with_periods(double periods, std::size_t n);

  double length() const noexcept { return length_; }
  std::size_t size() const noexcept { return n_; }
  /// L / (2*pi); the frequency lattice is (1/periods) * Z.
  double periods() const noexcept { return periods_; }
  double dx() const noexcept { return length_ / static_cast<double>(n_); }
  double dxi() const noexcept { return 1.0 / periods_; }

  double node(std::size_t m) const noexcept { return static_cast<double>(m) * dx(); }
  long wavenumber(std::size_t idx) const noexcept {
    const auto half = static_cast<long>(n_ / 2);
    const auto j = static_cast<long>(idx);
    return j < half ? j : j - static_cast<long>(n_);
  }
  double frequency(std::size_t idx) const noexcept {
    return static_cast<double>(wavenumber(idx)) / periods_;
  }
  /// Storage index of wavenumber j (taken modulo n).
  std::size_t index_of(long j) const noexcept;
  /// Largest retained |xi| on the positive side is (n/2 - 1)/P; the
  /// Nyquist mode sits at -n/2.
  double nyquist() const noexcept { return static_cast<double>(n_ / 2) / periods_; }

  /// Wavenumber j with xi == j/P, if xi lies on the lattice (relative
  /// tolerance 1e-9). Does not check that j is retained by the grid.
  std::optional<long> lattice_index(double xi) const noexcept;

  bool operator==(const TorusGrid& other) const noexcept {
    return n_ == other.n_ && length_ == other.length_;
  }

 private:
  double length_;
  double periods_;
  std::size_t n_;
};

}  // namespace envlab
