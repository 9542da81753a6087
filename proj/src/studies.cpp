#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "envlab/experiments.hpp"
#include "envlab/spectral.hpp"
#include "util.hpp"

namespace envlab {

namespace {

using Clock = std::chrono::steady_clock;

bool smooth_family(const ProfileSpec& p) {
  return p.family == ProfileSpec::Family::gaussian || p.family == ProfileSpec::Family::sech;
}

// Regularity index of the profile; smooth families count as infinitely regular.
double profile_s(const ProfileSpec& p) {
  return smooth_family(p) ? std::numeric_limits<double>::infinity() : p.s;
}

// Short form for check details and messages; the data itself is stored exactly.
std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

ConvergenceReport new_report(const RunConfig& cfg) {
  cfg.validate();
  ConvergenceReport r;
  r.study = to_string(cfg.study);
  r.config_json = cfg.to_json_text();
  r.config_hash = detail::sha256_hex(r.config_json);
  return r;
}

// Runs task(i) for every eps on a small pool. Results land in their own slot,
// so the report does not depend on scheduling. Failures are recorded by eps.
template <class R>
std::vector<std::optional<R>> per_eps(const RunConfig& cfg, ConvergenceReport& report,
                                      const std::function<R(double)>& task) {
  const std::size_t n = cfg.eps.size();
  std::vector<std::optional<R>> out(n);
  std::vector<std::string> errors(n);
  std::vector<double> seconds(n, 0.0);
  std::atomic<std::size_t> next{0};
  const std::size_t threads = worker_count(n);
  const auto start = Clock::now();

  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      const auto t0 = Clock::now();
      try {
        out[i] = task(cfg.eps[i]);
      } catch (const NumericalFailure& e) {
        errors[i] = "eps=" + fmt(cfg.eps[i]) + ": numerical failure at t=" + fmt(e.last_good_time()) + ": " +
                    e.what();
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception& e) {
        errors[i] = "eps=" + fmt(cfg.eps[i]) + ": " + e.what();
      }
      seconds[i] = std::chrono::duration<double>(Clock::now() - t0).count();
    }
  };

  if (threads == 1) {
    worker();
  } else {
    std::vector<std::exception_ptr> fatal(threads);
    std::vector<std::jthread> pool;
    for (std::size_t k = 0; k < threads; ++k) {
      pool.emplace_back([&, k] {
        try {
          worker();
        } catch (...) {
          fatal[k] = std::current_exception();
          next = n;
        }
      });
    }
    pool.clear();
    for (const auto& f : fatal) {
      if (f) std::rethrow_exception(f);
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i].empty()) report.failures.push_back(errors[i]);
    report.runtime.per_eps_seconds.emplace_back(cfg.eps[i], seconds[i]);
  }
  report.runtime.threads = threads;
  report.runtime.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return out;
}

// Fills slope/residual when there are >= 3 positive points.
void finish_series(Series& s) {
  if (s.points.size() < 3) return;
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : s.points) {
    if (!(p.value > 0.0) || !std::isfinite(p.value)) return;
    pts.emplace_back(p.eps, p.value);
  }
  const SlopeFit fit = fit_slope(pts);
  s.slope = fit.slope;
  s.residual = fit.residual;
}

void check_slope(ConvergenceReport& r, const Series& s, double lo, double hi) {
  Check c;
  c.name = s.name + " slope";
  if (!s.slope) {
    c.detail = "no slope (fewer than 3 positive points)";
  } else {
    c.passed = *s.slope >= lo && *s.slope <= hi;
    c.detail = "slope " + fmt(*s.slope) + " in [" + fmt(lo) + ", " + fmt(hi) + "]";
  }
  r.checks.push_back(std::move(c));
}

// Band for a predicted exponent: +-0.15. When the exponent carries the -eta
// shave the band is centred on the unshaved value and widened by eta.
std::pair<double, double> slope_band(const RunConfig& cfg, double predicted, bool eta_branch) {
  if (cfg.slope_band) return *cfg.slope_band;
  if (eta_branch) return {predicted - 0.15, predicted + 0.15 + 2.0 * cfg.eta};
  return {predicted - 0.15, predicted + 0.15};
}

// Values sorted by decreasing eps.
std::vector<double> by_decreasing_eps(const Series& s) {
  auto pts = s.points;
  std::sort(pts.begin(), pts.end(), [](const SeriesPoint& a, const SeriesPoint& b) { return a.eps > b.eps; });
  std::vector<double> v;
  for (const auto& p : pts) v.push_back(p.value);
  return v;
}

void check_decreasing(ConvergenceReport& r, const Series& s) {
  const auto v = by_decreasing_eps(s);
  Check c;
  c.name = s.name + " strictly decreasing as eps shrinks";
  c.passed = v.size() >= 2;
  std::ostringstream d;
  for (std::size_t i = 0; i < v.size(); ++i) {
    d << (i ? ", " : "") << fmt(v[i]);
    if (i > 0 && !(v[i] < v[i - 1])) c.passed = false;
  }
  c.detail = "values " + d.str();
  r.checks.push_back(std::move(c));
}

// "No decrease": the quantity stays above half its largest-eps value.
void check_not_vanishing(ConvergenceReport& r, const Series& s) {
  const auto v = by_decreasing_eps(s);
  Check c;
  c.name = s.name + " does not tend to zero";
  if (!v.empty()) {
    const double lowest = *std::min_element(v.begin(), v.end());
    c.passed = v.front() > 0.0 && lowest >= 0.5 * v.front();
    c.detail = "min " + fmt(lowest) + " vs first " + fmt(v.front());
  }
  r.checks.push_back(std::move(c));
}

TorusGrid slow_grid(const RunConfig& cfg) { return TorusGrid::with_periods(cfg.periods, cfg.slow_n); }

double slow_dt(const RunConfig& cfg, double eps) { return cfg.solver.dt > 0.0 ? cfg.solver.dt : eps * eps / 8.0; }

std::size_t phys_size(const RunConfig& cfg, double eps) {
  if (cfg.phys_n) return cfg.phys_n;
  return std::bit_ceil(static_cast<std::size_t>(std::ceil(cfg.slow_n / eps - 1e-9)));
}

int stride_for(double t_end, double dt, std::size_t samples) {
  const double steps = std::ceil(t_end / dt - 1e-9);
  return std::max(1, static_cast<int>(std::floor(steps / static_cast<double>(samples))));
}

SolverConfig nls_config(const RunConfig& cfg) {
  SolverConfig c;
  c.dt = cfg.nls_dt > 0.0 ? cfg.nls_dt : cfg.T / 256.0;
  c.scheme = Scheme::composition4;
  c.sample_stride = 1;
  return c;
}

Series make_series(const std::string& name, const RunConfig& cfg,
                   const std::vector<std::optional<double>>& values) {
  Series s;
  s.name = name;
  for (std::size_t i = 0; i < cfg.eps.size(); ++i) {
    if (values[i]) s.points.push_back({cfg.eps[i], *values[i]});
  }
  return s;
}

}  // namespace

ConvergenceReport run_main_convergence(const RunConfig& cfg) {
  ConvergenceReport report = new_report(cfg);
  struct Point {
    double l2 = 0.0, h1 = 0.0;
  };
  const TorusGrid slow = slow_grid(cfg);

  auto results = per_eps<Point>(cfg, report, [&](double eps) {
    const Field psi0 = make_profile(cfg.profile, slow, eps);
    const TorusGrid phys = physical_grid(slow, eps, phys_size(cfg, eps));
    const auto [u0, ut0] = build_initial_data(psi0, eps, phys);
    const auto nls = solve_nls(psi0, cfg.T, nls_config(cfg));

    SolverConfig kc = cfg.solver;
    kc.dt = slow_dt(cfg, eps) / (eps * eps);
    const double t_end = cfg.T / (eps * eps);
    kc.sample_stride = stride_for(t_end, kc.dt, cfg.time_samples);

    // Running max over every step; the stored samples are a subset.
    Point worst;
    auto observe = [&](const KGState& s) {
      const Field diff = s.W.real_part() * 2.0 - nls_approximant(nls, s.t, eps, phys);
      worst.l2 = std::max(worst.l2, error_norm(diff, eps, ErrorFunctionalSpec::Mode::l2));
      worst.h1 = std::max(worst.h1, error_norm(diff, eps, ErrorFunctionalSpec::Mode::h1_scaled));
    };
    const KGState k0{0.0, complexify(u0, ut0, KgScale::physical()), KgScale::physical()};
    const auto kg = solve_kg(k0, t_end, kc, observe);
    if (kg.info.drift_flagged) {
      throw NumericalFailure("energy drift " + fmt(kg.info.max_relative_drift) + " exceeds the certified level",
                             kg.back().t);
    }
    return worst;
  });

  std::vector<std::optional<double>> l2(results.size()), h1(results.size());
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i]) {
      l2[i] = results[i]->l2;
      h1[i] = results[i]->h1;
    }
  }
  const double s = profile_s(cfg.profile);
  const bool eta_branch = s / 3.0 + 0.5 >= 1.5 - cfg.eta;
  Series e2 = make_series("l2_error", cfg, l2);
  e2.predicted = eta_branch ? 1.5 - cfg.eta : s / 3.0 + 0.5;
  e2.law = eta_branch ? "eps^(3/2 - eta): smooth-data branch of min(s/3 + 1/2, 3/2 - eta)"
                      : "eps^(s/3 + 1/2): rough-data branch of min(s/3 + 1/2, 3/2 - eta)";
  finish_series(e2);
  Series e1 = make_series("h1_scaled_error", cfg, h1);
  e1.law = "|.|_{H^1} / sqrt(eps) -> 0, no rate";
  finish_series(e1);

  const auto [lo, hi] = slope_band(cfg, *e2.predicted, eta_branch);
  check_slope(report, e2, lo, hi);
  check_decreasing(report, e1);
  report.series = {e2, e1};
  return report;
}

ConvergenceReport run_linear_convergence(const RunConfig& cfg) {
  ConvergenceReport report = new_report(cfg);
  const TorusGrid slow = slow_grid(cfg);
  auto results = per_eps<double>(cfg, report, [&](double eps) {
    const Field u0 = make_profile(cfg.profile, slow, eps);
    return linear_deviation(u0, eps, cfg.T, static_cast<int>(cfg.time_samples));
  });
  Series dev = make_series("linear_deviation", cfg, results);
  finish_series(dev);
  if (smooth_family(cfg.profile)) {
    dev.law = "Taylor regime for smooth data: slope >= 0.9";
    const double lo = cfg.slope_band ? cfg.slope_band->first : 0.9;
    const double hi = cfg.slope_band ? cfg.slope_band->second : std::numeric_limits<double>::infinity();
    check_slope(report, dev, lo, hi);
  } else {
    dev.predicted = cfg.profile.s / 3.0;
    dev.law = "eps^(s/3)";
    const auto [lo, hi] = slope_band(cfg, *dev.predicted, false);
    check_slope(report, dev, lo, hi);
  }
  report.series = {dev};
  return report;
}

ConvergenceReport run_remainder_decay(const RunConfig& cfg) {
  ConvergenceReport report = new_report(cfg);
  struct Point {
    double r = 0.0, high = 0.0;
  };
  auto results = per_eps<Point>(cfg, report, [&](double eps) {
    const TorusGrid g = TorusGrid::with_periods(cfg.periods, amplitude_grid_size(cfg.periods, eps, cfg.slow_n));
    const Field psi0 = make_profile(cfg.profile, g, eps);
    SolverConfig c = cfg.solver;
    c.dt = slow_dt(cfg, eps);
    c.sample_stride = stride_for(cfg.T, c.dt, cfg.time_samples);
    c.core_only = false;
    Point worst;
    const double cut = 1.0 / (100.0 * eps);
    auto observe = [&](const AmplitudeState& s) {
      worst.r = std::max(worst.r, norm(s.r, NormSpec::sobolev(1.0, eps)));
      worst.high = std::max(worst.high, norm(lp_project(s.psi, cut, LpMode::high, true), NormSpec::sobolev(0.0)));
    };
    solve_amplitude(psi0, eps, cfg.T, c, observe);
    return worst;
  });

  std::vector<std::optional<double>> rv(results.size());
  Table pieces{"bound_pieces", {"eps", "r_max", "eps_pow", "core_high_max", "ratio_to_bound"}, {}};
  Check conform{"remainder within 10x of eps^(1-2 eta) + |P_high psi|", true, ""};
  double worst_ratio = 0.0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!results[i]) continue;
    const double eps = cfg.eps[i];
    rv[i] = results[i]->r;
    const double epow = std::pow(eps, 1.0 - 2.0 * cfg.eta);
    const double ratio = results[i]->r / (epow + results[i]->high);
    worst_ratio = std::max(worst_ratio, ratio);
    if (!(ratio <= 10.0)) conform.passed = false;
    pieces.rows.push_back({eps, results[i]->r, epow, results[i]->high, ratio});
  }
  conform.detail = "max ratio " + fmt(worst_ratio);

  const double s = profile_s(cfg.profile);
  const bool eta_branch = s >= 1.0 - cfg.eta;
  Series r = make_series("remainder_h1", cfg, rv);
  r.predicted = eta_branch ? 1.0 - cfg.eta : s;
  r.law = eta_branch ? "eps^(1 - eta)" : "eps^s";
  finish_series(r);
  const auto [lo, hi] = slope_band(cfg, *r.predicted, eta_branch);
  check_slope(report, r, lo, hi);
  report.checks.push_back(conform);
  report.series = {r};
  report.tables = {pieces};
  return report;
}

ConvergenceReport run_highfreq_core(const RunConfig& cfg) {
  ConvergenceReport report = new_report(cfg);
  const std::size_t nd = cfg.deltas.size();
  using Row = std::vector<double>;  // sharp values per delta, then weighted values per delta
  auto results = per_eps<Row>(cfg, report, [&](double eps) {
    const TorusGrid g = TorusGrid::with_periods(cfg.periods, amplitude_grid_size(cfg.periods, eps, cfg.slow_n));
    const Field psi0 = make_profile(cfg.profile, g, eps);
    SolverConfig c = cfg.solver;
    c.dt = slow_dt(cfg, eps);
    c.sample_stride = stride_for(cfg.T, c.dt, cfg.time_samples);
    Row worst(2 * nd, 0.0);
    auto observe = [&](const AmplitudeState& s) {
      for (std::size_t d = 0; d < nd; ++d) {
        const double N = cfg.deltas[d] * std::cbrt(1.0 / eps);
        const NormSpec h1 = NormSpec::sobolev(1.0, eps);
        worst[d] = std::max(worst[d], norm(lp_project(s.psi, N, LpMode::high, true), h1));
        worst[nd + d] = std::max(worst[nd + d], norm(m_multiplier(s.psi, N), h1));
      }
    };
    solve_amplitude(psi0, eps, cfg.T, c, observe);
    return worst;
  });

  const bool contaminated = cfg.profile.family == ProfileSpec::Family::highfreq_contaminated;
  for (std::size_t d = 0; d < nd; ++d) {
    std::vector<std::optional<double>> sharp(results.size()), weighted(results.size());
    for (std::size_t i = 0; i < results.size(); ++i) {
      if (!results[i]) continue;
      sharp[i] = (*results[i])[d];
      weighted[i] = (*results[i])[nd + d];
    }
    Series a = make_series("high_core_delta_" + fmt(cfg.deltas[d]), cfg, sharp);
    a.law = "|P_{>delta eps^(-1/3)} psi|_{H_eps^1} -> 0";
    finish_series(a);
    Series b = make_series("weighted_core_delta_" + fmt(cfg.deltas[d]), cfg, weighted);
    b.law = "|m_N(D) psi|_{H_eps^1}, N = delta eps^(-1/3)";
    finish_series(b);
    if (contaminated) {
      check_not_vanishing(report, a);
    } else {
      check_decreasing(report, a);
    }
    report.series.push_back(std::move(a));
    report.series.push_back(std::move(b));
  }
  return report;
}

ConvergenceReport run_energy_drift(const RunConfig& cfg) {
  ConvergenceReport report = new_report(cfg);
  struct Point {
    double drift = 0.0, drift_half = 0.0, mass_rate = 0.0;
  };
  const TorusGrid slow = slow_grid(cfg);
  auto results = per_eps<Point>(cfg, report, [&](double eps) {
    const Field psi0 = make_profile(cfg.profile, slow, eps);
    const TorusGrid phys = physical_grid(slow, eps, phys_size(cfg, eps));
    const auto [u0, ut0] = build_initial_data(psi0, eps, phys);
    const KGState s0 = to_rescaled(KGState{0.0, complexify(u0, ut0, KgScale::physical()), KgScale::physical()}, eps);
    auto drift = [&](double dt) {
      SolverConfig c = cfg.solver;
      c.dt = dt;
      c.sample_stride = 1;
      return solve_kg(s0, cfg.T, c).info.max_relative_drift;
    };
    Point p;
    p.drift = drift(slow_dt(cfg, eps));
    p.drift_half = drift(0.5 * slow_dt(cfg, eps));
    const auto nls = solve_nls(psi0, cfg.T, nls_config(cfg));
    p.mass_rate = nls.info.max_relative_drift / cfg.T;
    return p;
  });

  std::vector<std::optional<double>> d(results.size()), dh(results.size()), m(results.size());
  Check ok{"energy drift <= energy_tolerance", true, ""};
  Check order{"drift shrinks >= 8x when dt halves", true, ""};
  Check mass{"NLS mass drift <= 1e-10 per unit slow time", true, ""};
  std::ostringstream od, oo, om;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!results[i]) continue;
    const auto& p = *results[i];
    d[i] = p.drift;
    dh[i] = p.drift_half;
    m[i] = p.mass_rate;
    if (!(p.drift <= cfg.solver.energy_tolerance)) ok.passed = false;
    // Drifts at round-off level carry no order information.
    const bool roundoff = p.drift <= 1e-13;
    const double factor = p.drift_half > 0.0 ? p.drift / p.drift_half : std::numeric_limits<double>::infinity();
    if (!roundoff && !(factor >= 8.0)) order.passed = false;
    if (!(p.mass_rate <= 1e-10)) mass.passed = false;
    od << (i ? ", " : "") << fmt(p.drift);
    oo << (i ? ", " : "") << (roundoff ? std::string("round-off") : fmt(factor));
    om << (i ? ", " : "") << fmt(p.mass_rate);
  }
  ok.detail = "drift " + od.str();
  order.detail = "factor " + oo.str();
  mass.detail = "mass drift rate " + om.str();

  Series s1 = make_series("energy_drift", cfg, d);
  s1.law = "relative energy drift at dt";
  Series s2 = make_series("energy_drift_half_dt", cfg, dh);
  s2.law = "relative energy drift at dt/2";
  Series s3 = make_series("nls_mass_drift_rate", cfg, m);
  s3.law = "relative NLS mass drift per unit slow time";
  for (Series* s : {&s1, &s2, &s3}) finish_series(*s);
  report.series = {s1, s2, s3};
  report.checks = {ok, order, mass};
  return report;
}

double dual_route_gap(const ProfileSpec& profile, double eps, double T, double periods, std::size_t slow_n,
                      std::size_t samples) {
  if (samples < 1) throw ConfigError("dual_route_gap: samples must be >= 1");
  const TorusGrid slow = TorusGrid::with_periods(periods, amplitude_grid_size(periods, eps, slow_n));
  const Field psi0 = make_profile(profile, slow, eps);
  const TorusGrid phys = physical_grid(slow, eps, std::bit_ceil(static_cast<std::size_t>(slow.size() / eps)));
  const auto [u0, ut0] = build_initial_data(psi0, eps, phys);
  const double dt = eps * eps / 8.0;
  const int stride = stride_for(T, dt, samples);

  SolverConfig kc;
  kc.dt = dt / (eps * eps);
  kc.sample_stride = stride;
  const KGState k0{0.0, complexify(u0, ut0, KgScale::physical()), KgScale::physical()};
  const auto kg = solve_kg(k0, T / (eps * eps), kc);
  SolverConfig ac;
  ac.dt = dt;
  ac.sample_stride = stride;
  const auto amp = solve_amplitude(psi0, eps, T, ac);
  if (kg.samples.size() != amp.samples.size()) {
    throw NumericalFailure("dual_route_gap: sample times differ between the two routes", T);
  }

  const WavePacketParams params(eps);
  const NormSpec l2 = NormSpec::sobolev(0.0);
  double worst = 0.0;
  for (std::size_t k = 0; k < kg.samples.size(); ++k) {
    const Field a = amp.samples[k].amplitude();
    const Field b = resample(demodulate(to_rescaled(kg.samples[k], eps), params), slow);
    const double scale = norm(a, l2);
    worst = std::max(worst, scale > 0.0 ? norm(b - a, l2) / scale : norm(b, l2));
  }
  return worst;
}

ConvergenceReport run_decay_probe(const RunConfig& cfg) {
  ConvergenceReport report = new_report(cfg);
  const double eps = cfg.eps.front();
  std::vector<double> times;
  const double a = std::log(cfg.decay.t_min), b = std::log(cfg.decay.t_max);
  for (std::size_t k = 0; k < cfg.decay.points; ++k) {
    times.push_back(std::exp(a + (b - a) * static_cast<double>(k) / static_cast<double>(cfg.decay.points - 1)));
  }
  const auto start = Clock::now();
  Series s;
  s.name = "sup_norm";
  s.predicted = -0.5;
  s.law = "t^(-1/2)";
  try {
    const DecayProbeResult r = decay_probe(cfg.decay.N, eps, times);
    Table t{"decay", {"t", "sup"}, {}};
    std::vector<std::pair<double, double>> pts;
    for (std::size_t k = 0; k < times.size(); ++k) {
      t.rows.push_back({times[k], r.sup[k]});
      pts.emplace_back(times[k], r.sup[k]);
    }
    const SlopeFit fit = fit_slope(pts);
    s.slope = fit.slope;
    s.residual = fit.residual;
    report.tables.push_back(std::move(t));
  } catch (const NumericalFailure& e) {
    report.failures.push_back(std::string("decay probe: ") + e.what());
  } catch (const std::invalid_argument& e) {
    report.failures.push_back(std::string("decay probe: ") + e.what());
  }
  const auto [lo, hi] = cfg.slope_band ? *cfg.slope_band : std::make_pair(-0.55, -0.45);
  check_slope(report, s, lo, hi);
  report.series = {s};
  report.runtime.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  report.runtime.per_eps_seconds = {{eps, report.runtime.wall_seconds}};
  return report;
}

}  // namespace envlab
