#include "envlab/ansatz.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "envlab/spectral.hpp"

namespace envlab {

namespace {

constexpr double sqrt2 = std::numbers::sqrt2;

double profile_center(const ProfileSpec& spec, const TorusGrid& grid) {
  return spec.center < 0.0 ? 0.5 * grid.length() : spec.center;
}

Field gaussian_bump(const TorusGrid& grid, double center, double width, double xi = 0.0) {
  const double L = grid.length();
  return Field::sample(grid, [=](double x) {
    // Nearest periodic image of the offset.
    double d = std::remainder(x - center, L);
    return std::polar(std::exp(-0.5 * d * d / (width * width)), xi * x);
  });
}

Field tail_profile(const ProfileSpec& spec, const TorusGrid& grid) {
  const double cutoff = spec.cutoff > 0.0 ? spec.cutoff : 0.75 * grid.nyquist();
  if (!(cutoff < grid.nyquist())) {
    std::ostringstream msg;
    msg << "make_profile: tail cutoff " << cutoff << " is not below the Nyquist frequency "
        << grid.nyquist();
    throw ConfigError(msg.str());
  }
  const double c = profile_center(spec, grid);
  const double decay = -spec.s - 0.5 - 0.01;
  std::mt19937_64 rng(spec.seed);
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  ComplexVector spectrum(grid.size(), cplx(0.0, 0.0));
  // Phases drawn in the order j = 0, 1, -1, 2, -2, ... so they do not depend on n.
  const auto jmax = static_cast<long>(std::floor(cutoff * grid.periods() + 1e-9));
  for (long k = 0; k <= 2 * jmax; ++k) {
    const long j = (k % 2 == 1) ? (k + 1) / 2 : -(k / 2);
    const double xi = static_cast<double>(j) / grid.periods();
    const double phase = 2.0 * std::numbers::pi * uniform();
    spectrum[grid.index_of(j)] = std::polar(std::pow(bracket(xi), decay), phase - xi * c);
  }
  Field tail = Field::adopt_spectrum(grid, std::move(spectrum), false);
  if (spec.window <= 0.0) return tail;
  const Field win = gaussian_bump(grid, c, spec.window);
  const auto a = tail.values();
  const auto b = win.values();
  ComplexVector prod(a.size());
  for (std::size_t m = 0; m < a.size(); ++m) prod[m] = a[m] * b[m].real();
  return Field::adopt_values(grid, std::move(prod), false);
}

Field scaled_to(const Field& f, double target, double eps) {
  const double h = norm(f, NormSpec::sobolev(1.0, eps));
  if (!(h > 0.0)) throw ConfigError("make_profile: profile vanishes on this grid");
  return f * (target / h);
}

}  // namespace

ProfileSpec ProfileSpec::gaussian(double width, double amplitude) {
  ProfileSpec p;
  p.family = Family::gaussian;
  p.width = width;
  p.amplitude = amplitude;
  return p;
}

ProfileSpec ProfileSpec::fourier_tail(double s, std::uint64_t seed, double amplitude) {
  ProfileSpec p;
  p.family = Family::fourier_tail;
  p.s = s;
  p.seed = seed;
  p.amplitude = amplitude;
  return p;
}

ProfileSpec ProfileSpec::contaminated(double fraction, double amplitude) {
  ProfileSpec p;
  p.family = Family::highfreq_contaminated;
  p.contamination = fraction;
  p.amplitude = amplitude;
  return p;
}

std::string to_string(ProfileSpec::Family family) {
  switch (family) {
    case ProfileSpec::Family::gaussian:
      return "gaussian";
    case ProfileSpec::Family::sech:
      return "sech";
    case ProfileSpec::Family::fourier_tail:
      return "fourier_tail";
    case ProfileSpec::Family::highfreq_contaminated:
      return "highfreq_contaminated";
  }
  return "unknown";
}

ProfileSpec::Family profile_family_from_string(const std::string& name) {
  using F = ProfileSpec::Family;
  for (F f : {F::gaussian, F::sech, F::fourier_tail, F::highfreq_contaminated}) {
    if (to_string(f) == name) return f;
  }
  throw ConfigError("unknown profile family '" + name + "'");
}

double contamination_frequency(const ProfileSpec& spec, const TorusGrid& grid, double eps) {
  const double target = spec.contamination_factor * std::cbrt(1.0 / eps);
  return std::round(target * grid.periods()) / grid.periods();
}

Field make_profile(const ProfileSpec& spec, const TorusGrid& grid, double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) throw ConfigError("make_profile: eps must lie in (0, 1]");
  if (!(spec.amplitude >= 0.0)) throw ConfigError("make_profile: amplitude must be non-negative");
  if (spec.amplitude == 0.0) return Field::zeros(grid, false);
  if (!(spec.width > 0.0)) throw ConfigError("make_profile: width must be positive");
  const double c = profile_center(spec, grid);
  const double L = grid.length();

  switch (spec.family) {
    case ProfileSpec::Family::gaussian:
      return scaled_to(gaussian_bump(grid, c, spec.width), spec.amplitude, eps);
    case ProfileSpec::Family::sech: {
      const Field f = Field::sample(grid, [=](double x) {
        return cplx(1.0 / std::cosh(std::remainder(x - c, L) / spec.width), 0.0);
      });
      return scaled_to(f, spec.amplitude, eps);
    }
    case ProfileSpec::Family::fourier_tail:
      return scaled_to(tail_profile(spec, grid), spec.amplitude, eps);
    case ProfileSpec::Family::highfreq_contaminated: {
      const double xi_c = contamination_frequency(spec, grid, eps);
      if (!(xi_c + 6.0 / spec.width < grid.nyquist())) {
        throw ConfigError("make_profile: contamination frequency is not resolved by the grid");
      }
      const Field base = scaled_to(gaussian_bump(grid, c, spec.width), 1.0, eps);
      const Field bump = gaussian_bump(grid, c, spec.width, xi_c);
      const Field dirty = spec.contamination > 0.0 ? scaled_to(bump, spec.contamination, eps) : bump * 0.0;
      return scaled_to(base + dirty, spec.amplitude, eps);
    }
  }
  throw ConfigError("make_profile: unknown family");
}

TorusGrid physical_grid(const TorusGrid& slow, double eps, std::size_t n) {
  const double periods = slow.periods() / eps;
  if (std::abs(periods - std::round(periods)) > 1e-9 * periods) {
    throw ConfigError("physical_grid: L_slow / eps must be 2 pi times an integer");
  }
  return TorusGrid::with_periods(std::round(periods), n);
}

Field carrier_packet(const Field& psi_slow, double eps, const TorusGrid& phys, double t) {
  const TorusGrid& slow = psi_slow.grid();
  if (std::abs(phys.periods() * eps - slow.periods()) > 1e-9 * slow.periods()) {
    throw ConfigError("carrier_packet: physical grid is not the 1/eps refinement of the slow grid");
  }
  const auto carrier = phys.lattice_index(WavePacketParams::k);
  const long shift = *carrier;
  const long ns = static_cast<long>(slow.size());
  const long np = static_cast<long>(phys.size());
  if (ns / 2 + shift >= np / 2) {
    throw ConfigError("carrier_packet: physical grid too coarse for the slow spectrum");
  }
  const double move = eps * WavePacketParams::c_g * t;
  const cplx phase = std::polar(eps, -WavePacketParams::omega * t);
  const auto s = psi_slow.spectrum();
  ComplexVector z(phys.size(), cplx(0.0, 0.0));
  for (std::size_t i = 0; i < slow.size(); ++i) {
    const long j = slow.wavenumber(i);
    const double xi = slow.frequency(i);
    z[phys.index_of(j + shift)] = phase * std::polar(1.0, -xi * move) * s[i];
  }
  return Field::adopt_spectrum(phys, std::move(z), false);
}

namespace {

// u = z + conj z and 2 Im z, built in spectrum.
std::pair<Field, Field> real_and_imag_parts(const Field& z) {
  const auto s = z.spectrum();
  const std::size_t n = s.size();
  ComplexVector re(n), im(n);
  for (std::size_t i = 0; i < n; ++i) {
    const cplx mirror = std::conj(s[(n - i) % n]);
    re[i] = s[i] + mirror;
    im[i] = (s[i] - mirror) / cplx(0.0, 1.0);
  }
  return {Field::adopt_spectrum(z.grid(), std::move(re), true),
          Field::adopt_spectrum(z.grid(), std::move(im), true)};
}

}  // namespace

std::pair<Field, Field> build_initial_data(const Field& psi0_slow, double eps, const TorusGrid& phys) {
  const Field z = carrier_packet(psi0_slow, eps, phys);
  auto [u0, two_im] = real_and_imag_parts(z);
  const Field ut0 = apply_multiplier(two_im, [](double xi) { return bracket(xi); });
  return {u0, ut0};
}

Field nls_profile_at(const Trajectory<NLSState>& traj, double s) {
  const auto& v = traj.samples;
  if (v.empty()) throw std::out_of_range("nls_profile_at: empty trajectory");
  const double tol = 1e-12 * std::max(1.0, std::abs(s));
  if (s < v.front().t - tol || s > v.back().t + tol) {
    std::ostringstream msg;
    msg << "nls_profile_at: slow time " << s << " outside [" << v.front().t << ", " << v.back().t << "]";
    throw std::out_of_range(msg.str());
  }
  auto it = std::lower_bound(v.begin(), v.end(), s, [](const NLSState& a, double t) { return a.t < t; });
  if (it != v.end() && std::abs(it->t - s) <= tol) return it->psi;
  if (it != v.begin() && std::abs(std::prev(it)->t - s) <= tol) return std::prev(it)->psi;
  if (it == v.end()) return v.back().psi;
  const NLSState& hi = *it;
  const NLSState& lo = *std::prev(it);
  const double theta = (s - lo.t) / (hi.t - lo.t);
  const Field a = evolve_linear(lo.psi, s - lo.t, Schrodinger{});
  const Field b = evolve_linear(hi.psi, s - hi.t, Schrodinger{});
  return a * (1.0 - theta) + b * theta;
}

Field nls_approximant(const Trajectory<NLSState>& traj, double t_phys, double eps, const TorusGrid& phys) {
  const Field psi = nls_profile_at(traj, eps * eps * t_phys);
  const Field z = carrier_packet(psi, eps, phys, t_phys);
  return real_and_imag_parts(z).first;
}

double error_norm(const Field& difference, double eps, ErrorFunctionalSpec::Mode mode) {
  if (mode == ErrorFunctionalSpec::Mode::l2) return norm(difference, NormSpec::sobolev(0.0));
  return norm(difference, NormSpec::sobolev(1.0, 1.0)) / std::sqrt(eps);
}

double trajectory_distance(const std::vector<std::pair<double, Field>>& a,
                           const std::vector<std::pair<double, Field>>& b, double eps,
                           ErrorFunctionalSpec::Mode mode) {
  if (a.size() != b.size()) throw std::invalid_argument("trajectory_distance: sample counts differ");
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (std::abs(a[k].first - b[k].first) > 1e-12 * std::max(1.0, std::abs(a[k].first))) {
      throw std::invalid_argument("trajectory_distance: sample times differ");
    }
    worst = std::max(worst, error_norm(a[k].second - b[k].second, eps, mode));
  }
  return worst;
}

double approximation_error(const Trajectory<KGState>& kg, const Trajectory<NLSState>& nls, double eps,
                           const ErrorFunctionalSpec& spec) {
  if (kg.samples.empty()) throw std::invalid_argument("approximation_error: empty trajectory");
  const double t_max = spec.T / (eps * eps);
  if (kg.back().t < t_max * (1.0 - 1e-9)) {
    throw std::invalid_argument("approximation_error: KG trajectory does not reach T / eps^2");
  }
  if (nls.samples.empty() || nls.back().t < spec.T * (1.0 - 1e-9)) {
    throw std::invalid_argument("approximation_error: NLS trajectory does not reach T");
  }
  std::vector<std::pair<double, Field>> truth, model;
  for (const auto& s : kg.samples) {
    if (s.t > t_max * (1.0 + 1e-12)) break;
    const TorusGrid& phys = s.W.grid();
    truth.emplace_back(s.t, s.W.real_part() * 2.0);
    model.emplace_back(s.t, nls_approximant(nls, s.t, eps, phys));
  }
  return trajectory_distance(truth, model, eps, spec.mode);
}

}  // namespace envlab
