#include "envlab/propagators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "envlab/spectral.hpp"

namespace envlab {

namespace {

constexpr double sqrt2 = std::numbers::sqrt2;

void require_eps(double eps, const char* where) {
  if (!(eps > 0.0 && eps <= 1.0)) {
    throw std::invalid_argument(std::string(where) + ": eps must lie in (0, 1]");
  }
}

double kg_group_velocity(double xi, double eps) {
  const double w = 1.0 + eps * xi;
  return (w / bracket(w) - 1.0 / sqrt2) / eps;
}

std::size_t next_pow2(double x) {
  std::size_t n = 1;
  while (static_cast<double>(n) < x) n *= 2;
  return n;
}

}  // namespace

WavePacketParams::WavePacketParams(double e) : eps(e) { require_eps(e, "WavePacketParams"); }

double p_symbol(double xi, double eps) {
  require_eps(eps, "p_symbol");
  const double z = eps * xi;
  const double inv = 1.0 / (eps * eps);
  const double az = std::abs(z);
  if (az < 1e-4) {
    // Taylor expansion of <1+z> - sqrt(2) - z/sqrt(2) about z = 0.
    const double z2 = z * z;
    const double poly = 1.0 / 8.0 + z * (-1.0 / 16.0 + z * (3.0 / 128.0 + z * (-1.0 / 256.0 + z * (-3.0 / 1024.0))));
    return inv * sqrt2 * z2 * poly;
  }
  const double b = bracket(1.0 + z);
  if (az < 1.0) {
    // Rationalized: both square-root differences cleared.
    return inv * z * z * (2.0 + z) / (sqrt2 * (b + sqrt2) * (sqrt2 * (1.0 + z) + b));
  }
  return inv * (b - sqrt2 - z / sqrt2);
}

double schrodinger_symbol(double xi) noexcept { return xi * xi / (4.0 * sqrt2); }

double flow_symbol(const LinearFlow& flow, double xi) {
  struct Visitor {
    double xi;
    double operator()(const KgRescaled& f) const { return p_symbol(xi, f.eps); }
    double operator()(const Schrodinger&) const { return schrodinger_symbol(xi); }
    double operator()(const KgPhysical&) const { return bracket(xi); }
    double operator()(const Translation& f) const { return f.a * xi; }
  };
  return std::visit(Visitor{xi}, flow);
}

Field evolve_linear(const Field& f, double t, const LinearFlow& flow) {
  if (!std::isfinite(t)) throw std::invalid_argument("evolve_linear: t must be finite");
  if (const auto* kg = std::get_if<KgRescaled>(&flow)) require_eps(kg->eps, "evolve_linear");
  const TorusGrid& grid = f.grid();
  const auto s = f.spectrum();
  ComplexVector out(s.size());
  bool real = f.is_real();
  for (std::size_t i = 0; i < s.size(); ++i) {
    out[i] = std::polar(1.0, -t * flow_symbol(flow, grid.frequency(i))) * s[i];
  }
  // Even real symbols keep real fields real; anything else is treated as complex.
  if (real) {
    const bool even = std::holds_alternative<Schrodinger>(flow) || std::holds_alternative<KgPhysical>(flow);
    real = even || t == 0.0;
  }
  return Field::adopt_spectrum(grid, std::move(out), real);
}

double linear_deviation(const Field& u0, double eps, double T0, int samples) {
  require_eps(eps, "linear_deviation");
  if (!(T0 > 0.0)) throw std::invalid_argument("linear_deviation: T0 must be positive");
  if (samples < 2) throw std::invalid_argument("linear_deviation: need at least 2 samples");
  const TorusGrid& grid = u0.grid();
  const auto s = u0.spectrum();
  std::vector<double> diff(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double xi = grid.frequency(i);
    diff[i] = p_symbol(xi, eps) - schrodinger_symbol(xi);
  }
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double t = T0 * k / (samples - 1);
    double sum = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      // |exp(-i t p) - exp(-i t q)| = 2 |sin(t (p - q) / 2)|
      const double w = 2.0 * std::sin(0.5 * t * diff[i]);
      sum += w * w * std::norm(s[i]);
    }
    worst = std::max(worst, std::sqrt(grid.length() * sum));
  }
  return worst;
}

DecayProbeResult decay_probe(double N, double eps, std::span<const double> times,
                             const DecayProbeOptions& options) {
  if (!(N > 0.0)) throw std::invalid_argument("decay_probe: N must be positive");
  require_eps(eps, "decay_probe");
  if (times.empty()) throw std::invalid_argument("decay_probe: no times requested");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!(times[k] > 0.0) || (k > 0 && !(times[k] > times[k - 1]))) {
      throw std::invalid_argument("decay_probe: times must be positive and increasing");
    }
  }
  const double t_max = times.back();

  // Velocity range over the support of the smooth band 1/2 N < |xi| < 2 N.
  double vmin = 0.0, vmax = 0.0;
  bool first = true;
  for (int k = 0; k <= 400; ++k) {
    const double a = N * (0.5 + 1.5 * k / 400.0);
    for (double xi : {a, -a}) {
      const double v = kg_group_velocity(xi, eps);
      vmin = first ? v : std::min(vmin, v);
      vmax = first ? v : std::max(vmax, v);
      first = false;
    }
  }

  TorusGrid grid = options.grid.value_or(TorusGrid::with_periods(1, 16));
  if (!options.grid) {
    const double spread = (vmax - vmin) * t_max + 20.0 / N;
    const double periods = static_cast<double>(next_pow2(1.6 * spread / (2.0 * std::numbers::pi)));
    const std::size_t n = std::max<std::size_t>(16, next_pow2(16.0 * N * periods));
    grid = TorusGrid::with_periods(periods, n);
  }
  const double L = grid.length();
  const double vmid = 0.5 * (vmin + vmax);
  const double x0 = std::fmod(std::fmod(0.5 * L - vmid * t_max, L) + L, L);

  const std::size_t n = grid.size();
  ComplexVector spec(n, cplx(0.0, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = grid.frequency(i);
    if (std::abs(xi) <= 8.0 * N) spec[i] = std::polar(1.0 / L, -xi * x0) * lp_bump(xi / N);
  }
  const Field band = Field::adopt_spectrum(grid, std::move(spec), true);

  DecayProbeResult result{grid, norm(band, NormSpec::lebesgue(INFINITY)), {}};
  result.sup.reserve(times.size());
  double last_good = 0.0;
  for (double t : times) {
    const Field ev = evolve_linear(band, t, KgRescaled{eps});
    const auto v = ev.values();
    const double centre = x0 + vmid * t;
    double total = 0.0, near = 0.0, sup = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
      const double a = std::norm(v[m]);
      total += a;
      sup = std::max(sup, std::sqrt(a));
      double d = std::fmod(std::abs(grid.node(m) - centre - 0.5 * L), L);
      d = std::min(d, L - d);
      if (d <= L / 16.0) near += a;
    }
    if (near > options.wrap_tolerance * total) {
      std::ostringstream msg;
      msg << "decay_probe: dispersed wave wraps around the torus at t = " << t
          << " (L = " << L << ")";
      throw NumericalFailure(msg.str(), last_good);
    }
    result.sup.push_back(sup);
    last_good = t;
  }
  return result;
}

}  // namespace envlab
