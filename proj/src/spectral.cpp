#include "envlab/spectral.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "dealias.hpp"
#include "fft.hpp"

namespace envlab {

Field apply_multiplier(const Field& f, const Symbol& symbol) {
  const TorusGrid& grid = f.grid();
  const std::size_t n = grid.size();
  ComplexVector sym(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = grid.frequency(i);
    sym[i] = symbol(xi);
    if (!std::isfinite(sym[i].real()) || !std::isfinite(sym[i].imag())) {
      std::ostringstream msg;
      msg << "apply_multiplier: symbol is not finite at xi = " << xi;
      throw std::invalid_argument(msg.str());
    }
  }

  const auto s = f.spectrum();
  ComplexVector out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = sym[i] * s[i];

  bool real = f.is_real();
  if (real) {
    for (std::size_t i = 1; i < n && real; ++i) {
      if (i == n / 2) continue;
      real = sym[n - i] == std::conj(sym[i]);
    }
    real = real && (sym[n / 2].imag() == 0.0 || s[n / 2] == cplx(0.0, 0.0)) &&
           sym[0].imag() == 0.0;
  }
  return Field::adopt_spectrum(grid, std::move(out), real);
}

double lp_plateau(double xi) noexcept {
  const double a = std::abs(xi);
  if (a <= 1.0) return 1.0;
  if (a >= 2.0) return 0.0;
  const double t = a - 1.0;
  return 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
}

double lp_bump(double xi) noexcept { return lp_plateau(xi) - lp_plateau(2.0 * xi); }

Field lp_project(const Field& f, double N, LpMode mode, bool sharp) {
  if (!(N > 0.0) || !std::isfinite(N)) {
    throw std::invalid_argument("lp_project: N must be positive and finite");
  }
  if (sharp) {
    switch (mode) {
      case LpMode::low:
        return apply_multiplier(f, [N](double xi) { return std::abs(xi) <= N ? 1.0 : 0.0; });
      case LpMode::high:
        return apply_multiplier(f, [N](double xi) { return std::abs(xi) > N ? 1.0 : 0.0; });
      case LpMode::band:
        return apply_multiplier(f, [N](double xi) {
          const double a = std::abs(xi);
          return a > 0.5 * N && a <= N ? 1.0 : 0.0;
        });
    }
  }
  switch (mode) {
    case LpMode::low:
      return apply_multiplier(f, [N](double xi) { return lp_plateau(2.0 * xi / N); });
    case LpMode::high:
      return apply_multiplier(f, [N](double xi) { return 1.0 - lp_plateau(2.0 * xi / N); });
    case LpMode::band:
      break;
  }
  return apply_multiplier(f, [N](double xi) { return lp_bump(xi / N); });
}

double m_symbol(double xi, double N) noexcept { return std::min(std::abs(xi) / N, 1.0); }

Field m_multiplier(const Field& f, double N) {
  if (!(N > 0.0) || !std::isfinite(N)) {
    throw std::invalid_argument("m_multiplier: N must be positive and finite");
  }
  return apply_multiplier(f, [N](double xi) { return m_symbol(xi, N); });
}

double norm(const Field& f, const NormSpec& spec) {
  const TorusGrid& grid = f.grid();
  if (spec.flavor == NormSpec::Flavor::rescaled_sobolev) {
    if (!(spec.eps > 0.0 && spec.eps <= 1.0)) {
      throw std::invalid_argument("norm: eps must lie in (0, 1]");
    }
    const auto s = f.spectrum();
    double sum = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      double w = 1.0;
      if (spec.s != 0.0) {
        const double b2 = 1.0 + std::pow(spec.eps * grid.frequency(i), 2);
        w = std::pow(b2, spec.s);
      }
      sum += w * std::norm(s[i]);
    }
    return std::sqrt(grid.length() * sum);
  }

  if (!(spec.r >= 1.0)) throw std::invalid_argument("norm: Lebesgue exponent must be >= 1");
  const auto v = f.values();
  if (std::isinf(spec.r)) {
    double mx = 0.0;
    for (const auto& x : v) mx = std::max(mx, std::abs(x));
    return mx;
  }
  double sum = 0.0;
  if (spec.r == 2.0) {
    for (const auto& x : v) sum += std::norm(x);
  } else {
    for (const auto& x : v) sum += std::pow(std::abs(x), spec.r);
  }
  return std::pow(sum * grid.dx(), 1.0 / spec.r);
}

Field dealiased_cubic(const Field& f, const Field& g, const Field& h, ConjPattern conj) {
  require_same_grid(f, g, "dealiased_cubic");
  require_same_grid(f, h, "dealiased_cubic");
  const std::size_t n = f.size();
  const std::size_t m = 2 * n;

  ComplexVector product(m, cplx(1.0, 0.0));
  ComplexVector spec(n), padded(m), values(m);
  const Field* factors[3] = {&f, &g, &h};
  for (int k = 0; k < 3; ++k) {
    const auto s = factors[k]->spectrum();
    if (conj[static_cast<std::size_t>(k)]) {
      detail::conj_spectrum(s, spec);
      detail::pad_spectrum(spec, padded);
    } else {
      detail::pad_spectrum(s, padded);
    }
    fft::backward(padded, values);
    for (std::size_t i = 0; i < m; ++i) product[i] *= values[i];
  }
  fft::forward(product, padded);
  ComplexVector out(n);
  detail::truncate_spectrum(padded, out);
  const bool real = f.is_real() && g.is_real() && h.is_real();
  return Field::adopt_spectrum(f.grid(), std::move(out), real);
}

double quartic_integral(const Field& u) {
  const std::size_t n = u.size();
  const std::size_t m = fft::next_smooth_size(2 * n + 1);
  ComplexVector padded(m), values(m);
  detail::pad_spectrum(u.spectrum(), padded);
  const cplx nyq = 0.5 * padded[m - n / 2];
  padded[m - n / 2] = nyq;
  padded[n / 2] = nyq;
  fft::backward(padded, values);
  double sum = 0.0;
  for (const auto& x : values) {
    const double a = x.real() * x.real();
    sum += a * a;
  }
  return sum * u.grid().length() / static_cast<double>(m);
}

namespace {

void require_real(const Field& f, const char* where) {
  if (!f.is_real()) {
    throw std::invalid_argument(std::string(where) + ": expected a real-valued field");
  }
}

struct Quadratics {
  double grad2 = 0.0;
  double mass = 0.0;
};

Quadratics quadratics(const Field& u) {
  const auto s = u.spectrum();
  const TorusGrid& grid = u.grid();
  Quadratics q;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double a = std::norm(s[i]);
    const double xi = grid.frequency(i);
    q.mass += a;
    q.grad2 += xi * xi * a;
  }
  q.mass *= grid.length();
  q.grad2 *= grid.length();
  return q;
}

double mass(const Field& u) { return quadratics(u).mass; }

}  // namespace

double energy_physical(const Field& u, const Field& u_t) {
  require_real(u, "energy_physical");
  require_real(u_t, "energy_physical");
  require_same_grid(u, u_t, "energy_physical");
  const Quadratics q = quadratics(u);
  return 0.5 * (q.grad2 + mass(u_t) + q.mass) + 0.25 * quartic_integral(u);
}

double energy_rescaled(const Field& v, const Field& v_t, double eps) {
  require_real(v, "energy_rescaled");
  require_real(v_t, "energy_rescaled");
  require_same_grid(v, v_t, "energy_rescaled");
  if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("energy_rescaled: eps must lie in (0, 1]");
  const Quadratics q = quadratics(v);
  const double e2 = eps * eps;
  return 0.5 * e2 * q.grad2 + 0.5 * q.mass + 0.5 * e2 * e2 * mass(v_t) +
         0.25 * e2 * quartic_integral(v);
}

}  // namespace envlab
