#pragma once

#include <array>
#include <cmath>
#include <functional>

#include "envlab/field.hpp"

namespace envlab {

/// Japanese bracket sqrt(1 + x^2).
inline double bracket(double x) noexcept { return std::sqrt(1.0 + x * x); }

using Symbol = std::function<cplx(double)>;

/// Spectrum multiplied by symbol(xi_j). The result keeps the real flag when
/// the symbol is conjugate-even on the grid. Throws std::invalid_argument
/// naming the frequency if the symbol is not finite somewhere.
Field apply_multiplier(const Field& f, const Symbol& symbol);

enum class LpMode { band, low, high };

/// Littlewood-Paley pieces.
///
/// sharp: low keeps |xi| <= N, high keeps |xi| > N, band keeps N/2 < |xi| <= N.
/// smooth: band multiplies by chi(xi/N) where chi(xi) = phi(xi) - phi(2 xi)
/// and phi is a C^2 plateau (1 on |xi| <= 1, 0 on |xi| >= 2); low multiplies
/// by phi(2 xi / N) (the sum of all bands below N), high by its complement.
Field lp_project(const Field& f, double N, LpMode mode, bool sharp);

/// The plateau phi used by the smooth projections.
double lp_plateau(double xi) noexcept;
double lp_bump(double xi) noexcept;

/// m_N(xi) = min(|xi| / N, 1).
Field m_multiplier(const Field& f, double N);
double m_symbol(double xi, double N) noexcept;

struct NormSpec {
  enum class Flavor { rescaled_sobolev, lebesgue };

  Flavor flavor = Flavor::rescaled_sobolev;
  double s = 0.0;
  double eps = 1.0;
  double r = 2.0;

  static NormSpec sobolev(double s, double eps = 1.0) {
    return {Flavor::rescaled_sobolev, s, eps, 2.0};
  }
  static NormSpec lebesgue(double r) { return {Flavor::lebesgue, 0.0, 1.0, r}; }
};

/// H_eps^s: sqrt(L sum <eps xi_j>^{2s} |u_j|^2).
/// L^r: (sum |u(x_m)|^r L/n)^{1/r}; r = infinity gives the max norm.
double norm(const Field& f, const NormSpec& spec);

/// Which factors of a cubic product are conjugated.
using ConjPattern = std::array<bool, 3>;

/// Pointwise product f' g' h' (primes mark requested conjugations) with the
/// spectrum truncated to the grid's modes, free of aliasing. Conjugation is
/// taken on the grid (same convention as Field::conj).
Field dealiased_cubic(const Field& f, const Field& g, const Field& h,
                      ConjPattern conj = {false, false, false});

/// 1/2 (|u_x|^2 + |u_t|^2 + |u|^2) + 1/4 int u^4.
double energy_physical(const Field& u, const Field& u_t);

/// eps^2/2 |v_x|^2 + 1/2 |v|^2 + eps^4/2 |v_t|^2 + eps^2/4 int v^4.
double energy_rescaled(const Field& v, const Field& v_t, double eps);

/// int u^4 over the torus, exact for the trigonometric interpolant of a real
/// field (Nyquist coefficient split evenly between +-n/2).
double quartic_integral(const Field& u);

}  // namespace envlab
