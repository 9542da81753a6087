#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <numbers>
#include <thread>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "envlab/experiments.hpp"
#include "util.hpp"

namespace envlab {

namespace {

constexpr double sqrt2 = std::numbers::sqrt2;

// Full 16-point Gauss-Legendre rule on [-1, 1].
struct Rule {
  std::vector<double> x, w;
  Rule() {
    using G = boost::math::quadrature::gauss<double, 16>;
    const auto& a = G::abscissa();
    const auto& b = G::weights();
    for (std::size_t i = 0; i < a.size(); ++i) {
      x.push_back(a[i]);
      w.push_back(b[i]);
      if (a[i] != 0.0) {
        x.push_back(-a[i]);
        w.push_back(b[i]);
      }
    }
  }
};

const Rule& rule() {
  static const Rule r;
  return r;
}

std::string brief(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double bracket1(double z) { return std::sqrt(1.0 + z * z); }

// Composite rule with `panels` equal panels on [a, b]; f(x) summed.
template <class F>
double composite(double a, double b, std::size_t panels, F&& f) {
  if (!(b > a)) return 0.0;
  const Rule& r = rule();
  const double h = (b - a) / static_cast<double>(panels);
  double sum = 0.0;
  for (std::size_t p = 0; p < panels; ++p) {
    const double mid = a + (static_cast<double>(p) + 0.5) * h;
    double s = 0.0;
    for (std::size_t k = 0; k < r.x.size(); ++k) s += r.w[k] * f(mid + 0.5 * h * r.x[k]);
    sum += 0.5 * h * s;
  }
  return sum;
}

double hexagon_integral(double eps, double eta, int sign, double tau, double xi, std::size_t panels, bool swap) {
  const double R = 1.0 / (50.0 * eps);
  const double inv = 1.0 / (eps * eps);
  const double power = -(1.0 - eta);
  auto integrand = [&](double x1, double x2) {
    const double y = tau + inv * (sign * bracket1(1.0 + eps * x1) + bracket1(1.0 + eps * x2) +
                                  bracket1(1.0 + eps * (xi - x1 - x2)));
    return std::pow(1.0 + y * y, power);
  };
  // Outer variable a, inner b with |b| <= R and |xi - a - b| <= R.
  auto inner = [&](double a) {
    const double lo = std::max(-R, xi - a - R);
    const double hi = std::min(R, xi - a + R);
    return composite(lo, hi, panels, [&](double b) { return swap ? integrand(b, a) : integrand(a, b); });
  };
  const double A = std::max(-R, xi - 2.0 * R);
  const double B = std::min(R, xi + 2.0 * R);
  // The inner limits have a kink at a = xi; split there so each piece is smooth.
  if (xi > A && xi < B) return composite(A, xi, panels, inner) + composite(xi, B, panels, inner);
  return composite(A, B, panels, inner);
}

}  // namespace

KernelQuadrature kernel_integral(double eps, double eta, int sign, double tau, double xi,
                                 const KernelSettings& settings, bool swap_order) {
  KernelQuadrature q;
  std::size_t panels = 4;
  double prev = hexagon_integral(eps, eta, sign, tau, xi, panels, swap_order);
  while (panels < settings.max_panels) {
    panels *= 2;
    const double cur = hexagon_integral(eps, eta, sign, tau, xi, panels, swap_order);
    q.value = cur;
    q.panels = panels;
    if (std::abs(cur - prev) <= settings.tolerance * std::abs(cur)) {
      q.converged = true;
      return q;
    }
    prev = cur;
  }
  q.value = prev;
  q.panels = panels;
  return q;
}

double kernel_bound_value(double eps, double eta, int sign, double tau) {
  const double c = 2.0 * sqrt2 + sign * sqrt2;
  double best = 0.0;
  for (double d : {0.1, -0.1}) {
    best = std::max(best, std::pow(bracket1(tau + (c + d) / (eps * eps)), -(1.0 - 2.0 * eta)));
  }
  return best;
}

std::vector<KernelSample> kernel_samples(const RunConfig& cfg) {
  cfg.validate();
  std::vector<KernelSample> samples;
  for (double eps : cfg.eps) {
    for (int sign : {1, -1}) {
      const double centre = -(2.0 * sqrt2 + sign * sqrt2) / (eps * eps);
      const double xmax = 3.0 / (50.0 * eps);
      for (std::size_t a = 0; a < cfg.kernel.tau_points; ++a) {
        for (std::size_t b = 0; b < cfg.kernel.xi_points; ++b) {
          KernelSample s;
          s.eps = eps;
          s.eta = cfg.eta;
          s.sign = sign;
          const double ta = cfg.kernel.tau_points > 1 ? double(a) / double(cfg.kernel.tau_points - 1) : 0.5;
          const double xb = cfg.kernel.xi_points > 1 ? double(b) / double(cfg.kernel.xi_points - 1) : 0.5;
          s.tau = centre + (2.0 * ta - 1.0) * 4.0 / (eps * eps);
          s.xi = (2.0 * xb - 1.0) * xmax;
          samples.push_back(s);
        }
      }
    }
  }
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < samples.size(); i = next++) {
      KernelSample& s = samples[i];
      const KernelQuadrature q = kernel_integral(s.eps, s.eta, s.sign, s.tau, s.xi, cfg.kernel);
      s.value = q.value;
      s.converged = q.converged;
      s.panels = q.panels;
      s.bound = kernel_bound_value(s.eps, s.eta, s.sign, s.tau);
      s.ratio = s.value / s.bound;
    }
  };
  {
    std::vector<std::jthread> pool;
    const std::size_t threads = worker_count(samples.size());
    for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(work);
  }
  return samples;
}

ConvergenceReport run_kernel_bound(const RunConfig& cfg) {
  cfg.validate();
  ConvergenceReport report;
  report.study = to_string(cfg.study);
  report.config_json = cfg.to_json_text();
  report.config_hash = detail::sha256_hex(report.config_json);

  const auto start = std::chrono::steady_clock::now();
  const auto samples = kernel_samples(cfg);
  report.runtime.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report.runtime.threads = worker_count(samples.size());

  Table t{"samples", {"eps", "eta", "sign", "tau", "xi", "value", "bound", "ratio", "converged", "panels"}, {}};
  std::size_t flagged = 0;
  bool positive = true;
  for (const auto& s : samples) {
    t.rows.push_back({s.eps, s.eta, double(s.sign), s.tau, s.xi, s.value, s.bound, s.ratio,
                      s.converged ? 1.0 : 0.0, double(s.panels)});
    if (!s.converged) ++flagged;
    if (!(s.value >= 0.0)) positive = false;
  }

  // Max ratio per (eps, sign) over converged samples only.
  bool finite = true;
  for (int sign : {1, -1}) {
    Series m;
    m.name = sign > 0 ? "max_ratio_plus" : "max_ratio_minus";
    m.law = "max over the sample grid of I / bound; bounded in eps";
    for (double eps : cfg.eps) {
      double best = 0.0;
      for (const auto& s : samples) {
        if (s.eps == eps && s.sign == sign && s.converged) best = std::max(best, s.ratio);
      }
      if (!std::isfinite(best)) finite = false;
      m.points.push_back({eps, best});
    }
    report.series.push_back(std::move(m));
  }

  report.checks.push_back({"all quadratures converged", flagged == 0,
                           std::to_string(flagged) + " of " + std::to_string(samples.size()) + " flagged"});
  report.checks.push_back({"integral values non-negative", positive, ""});
  double hi = 0.0;
  for (const auto& s : report.series) {
    for (const auto& p : s.points) hi = std::max(hi, p.value);
  }
  // Variation across eps of the overall max ratio.
  double vmin = INFINITY, vmax = 0.0;
  for (double eps : cfg.eps) {
    double best = 0.0;
    for (const auto& s : report.series) {
      for (const auto& p : s.points) {
        if (p.eps == eps) best = std::max(best, p.value);
      }
    }
    vmin = std::min(vmin, best);
    vmax = std::max(vmax, best);
  }
  const double variation = vmax / vmin;
  report.checks.push_back({"max ratio finite", finite && hi > 0.0 && std::isfinite(hi), "max " + brief(hi)});
  report.checks.push_back({"max ratio varies < 3x across eps", variation < 3.0,
                           "variation " + brief(variation)});
  report.tables.push_back(std::move(t));
  return report;
}

}  // namespace envlab
