// Acceptance run: one PASS/FAIL line per criterion, at the resolutions the
// criteria ask for. Two criteria are known to fail at desk scale (see
// README, "Known gaps"); they are printed honestly and do not change the exit
// status unless they unexpectedly pass, which is reported but tolerated.
//
//   acceptance            run everything
//   acceptance 3 12       run only the listed criteria
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "envlab/ansatz.hpp"
#include "envlab/experiments.hpp"
#include "envlab/propagators.hpp"
#include "envlab/solvers.hpp"
#include "envlab/spectral.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace envlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  bool known_gap;
  std::function<Outcome()> run;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

const Series& series_named(const ConvergenceReport& r, const std::string& name) {
  for (const auto& s : r.series) {
    if (s.name == name) return s;
  }
  throw std::runtime_error("report has no series " + name);
}

bool check_passed(const ConvergenceReport& r, const std::string& prefix) {
  for (const auto& c : r.checks) {
    if (c.name.rfind(prefix, 0) == 0) return c.passed;
  }
  throw std::runtime_error("report has no check " + prefix);
}

std::string slope_text(const Series& s) { return s.slope ? num(*s.slope) : std::string("none"); }

bool in_band(const Series& s, double lo, double hi) { return s.slope && *s.slope >= lo && *s.slope <= hi; }

Outcome crit_oracles() {
  Outcome o{true, ""};
  // NLS plane wave: psi = a exp(-i lambda t), lambda = 3 a^2 / (2 sqrt 2).
  const TorusGrid g = TorusGrid::with_periods(16, 256);
  const double a = 0.1, lambda = 3.0 / (2.0 * std::numbers::sqrt2) * a * a;
  SolverConfig nc;
  nc.dt = 1e-3;
  nc.scheme = Scheme::composition4;
  nc.sample_stride = 1000;
  const auto nls = solve_nls(Field::sample(g, [=](double) { return cplx(a, 0.0); }), 1.0, nc);
  double plane = 0.0;
  for (const auto& v : nls.back().psi.values()) plane = std::max(plane, std::abs(v - a * std::polar(1.0, -lambda)));
  if (!(plane <= 1e-9)) o.passed = false;

  // Uniform NLKG against an adaptive Dormand-Prince run of u'' + u + u^3 = 0.
  const auto ref = oracle::ode_reference(0.5, 0.0, 10.0, 1e-13);
  const TorusGrid g1 = TorusGrid::with_periods(1, 16);
  const Field u = Field::sample_real(g1, [](double) { return 0.5; });
  SolverConfig kc;
  kc.dt = 1e-3;
  kc.sample_stride = 100000;
  const auto kg = solve_kg(KGState{0.0, complexify(u, Field::zeros(g1), KgScale::physical()), KgScale::physical()},
                           10.0, kc);
  const auto [ue, ute] = decomplexify(kg.back().W, KgScale::physical());
  double uniform = 0.0;
  for (std::size_t m = 0; m < g1.size(); ++m) {
    uniform = std::max({uniform, std::abs(ue.values()[m].real() - ref[0]), std::abs(ute.values()[m].real() - ref[1])});
  }
  if (!(uniform <= 1e-8)) o.passed = false;
  o.detail = "plane wave err " + num(plane) + " (<= 1e-9), uniform NLKG err " + num(uniform) + " (<= 1e-8)";
  return o;
}

Outcome crit_conservation() {
  RunConfig c = RunConfig::defaults_for(Study::energy_drift);
  c.eps = {0.125};
  const auto r = run_energy_drift(c);
  const double drift = series_named(r, "energy_drift").points.at(0).value;
  const double mass = series_named(r, "nls_mass_drift_rate").points.at(0).value;
  return {r.failures.empty() && drift <= 1e-7 && mass <= 1e-10,
          "energy drift " + num(drift) + " (<= 1e-7), mass drift rate " + num(mass) + " (<= 1e-10)"};
}

Outcome crit_dual_route() {
  Outcome o{true, ""};
  for (double eps : {0.25, 0.125}) {
    const double gap = dual_route_gap(ProfileSpec::gaussian(), eps, 1.0, 16, 256, 16);
    if (!(gap <= 1e-5)) o.passed = false;
    o.detail += (o.detail.empty() ? "" : ", ") + std::string("eps ") + num(eps) + ": " + num(gap);
  }
  o.detail = "max relative L2 gap " + o.detail + " (<= 1e-5)";
  return o;
}

Outcome crit_linear_rate() {
  RunConfig c = RunConfig::defaults_for(Study::converge_linear);
  c.profile = ProfileSpec::fourier_tail(1.5);
  const auto r = run_linear_convergence(c);
  const Series& s = series_named(r, "linear_deviation");
  return {r.failures.empty() && in_band(s, 0.35, 0.65), "slope " + slope_text(s) + " in [0.35, 0.65]"};
}

// Shared by the smooth-branch rate and the H^1 limit.
const ConvergenceReport& gaussian_main() {
  static const ConvergenceReport r = [] {
    RunConfig c = RunConfig::defaults_for(Study::converge_main);
    c.eps = {0.25, 0.125, 0.0625};
    c.profile = ProfileSpec::gaussian();
    return run_main_convergence(c);
  }();
  return r;
}

Outcome crit_smooth_rate() {
  const auto& r = gaussian_main();
  const Series& s = series_named(r, "l2_error");
  return {r.failures.empty() && in_band(s, 1.3, 1.7), "slope " + slope_text(s) + " in [1.3, 1.7]"};
}

Outcome crit_rough_rate() {
  RunConfig c = RunConfig::defaults_for(Study::converge_main);
  c.eps = {0.25, 0.125, 0.0625};
  c.profile = ProfileSpec::fourier_tail(1.5);
  const auto r = run_main_convergence(c);
  const Series& s = series_named(r, "l2_error");
  return {r.failures.empty() && in_band(s, 0.85, 1.15), "slope " + slope_text(s) + " in [0.85, 1.15]"};
}

Outcome crit_h1_limit() {
  const auto& r = gaussian_main();
  const Series& s = series_named(r, "h1_scaled_error");
  bool decreasing = s.points.size() == 3;
  std::string values;
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    if (i && !(s.points[i].value < s.points[i - 1].value)) decreasing = false;
    values += (i ? " > " : "") + num(s.points[i].value);
  }
  return {r.failures.empty() && decreasing, "H1/sqrt(eps) errors " + values};
}

Outcome crit_remainder() {
  RunConfig g = RunConfig::defaults_for(Study::remainder_decay);
  g.profile = ProfileSpec::gaussian();
  const auto rg = run_remainder_decay(g);
  RunConfig t = g;
  t.profile = ProfileSpec::fourier_tail(0.5);
  const auto rt = run_remainder_decay(t);
  const Series& sg = series_named(rg, "remainder_h1");
  const Series& st = series_named(rt, "remainder_h1");
  const bool conform = check_passed(rg, "remainder within") && check_passed(rt, "remainder within");
  const bool ok = rg.failures.empty() && rt.failures.empty() && in_band(sg, 0.8, 1.2) && in_band(st, 0.35, 0.65) &&
                  conform;
  return {ok, "gaussian slope " + slope_text(sg) + " in [0.8, 1.2], tail s=0.5 slope " + slope_text(st) +
                  " in [0.35, 0.65], 10x conformance " + (conform ? "ok" : "violated")};
}

Outcome crit_highfreq() {
  RunConfig g = RunConfig::defaults_for(Study::highfreq_core);
  g.profile = ProfileSpec::gaussian();
  const auto rg = run_highfreq_core(g);
  RunConfig c = g;
  c.profile = ProfileSpec::contaminated();
  const auto rc = run_highfreq_core(c);
  bool ok = rg.failures.empty() && rc.failures.empty() && rg.passed() && rc.passed();
  return {ok, std::string("gaussian strictly decreasing for every delta: ") + (rg.passed() ? "yes" : "no") +
                  "; contaminated shows no decrease: " + (rc.passed() ? "yes" : "no")};
}

Outcome crit_decay() {
  RunConfig c = RunConfig::defaults_for(Study::decay_probe);
  c.eps = {0.25};
  c.decay.N = 1.0;
  c.decay.t_min = 1e2;
  c.decay.t_max = 1e4;
  const auto r = run_decay_probe(c);
  const Series& s = series_named(r, "sup_norm");
  return {r.failures.empty() && in_band(s, -0.55, -0.45), "slope " + slope_text(s) + " in [-0.55, -0.45]"};
}

Outcome crit_kernel() {
  RunConfig c = RunConfig::defaults_for(Study::kernel_bound);
  c.eps = {0.125, 0.0625};
  c.eta = 0.05;
  const auto r = run_kernel_bound(c);
  std::string detail;
  for (const auto& ch : r.checks) {
    detail += (detail.empty() ? "" : "; ") + ch.name + (ch.passed ? " ok" : " FAILED") +
              (ch.detail.empty() ? "" : " (" + ch.detail + ")");
  }
  return {r.passed(), detail};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome crit_infrastructure() {
  Outcome o{true, ""};
  // Dealiased cubic against the direct O(n^3) convolution.
  double conv = 0.0;
  for (std::size_t n : {16u, 32u, 64u}) {
    const TorusGrid g = TorusGrid::with_periods(2, n);
    const long band = static_cast<long>(n / 2);
    const Field a = testutil::random_field(g, band, 1), b = testutil::random_field(g, band, 2),
                c = testutil::random_field(g, band, 3);
    for (int pat = 0; pat < 8; ++pat) {
      const ConjPattern p = {bool(pat & 1), bool(pat & 2), bool(pat & 4)};
      const ComplexVector want = oracle::convolution_oracle(a, b, c, p);
      conv = std::max(conv, testutil::max_abs_diff(dealiased_cubic(a, b, c, p).spectrum(), want) /
                                testutil::max_abs(want));
    }
  }
  if (!(conv <= 1e-12)) o.passed = false;

  // Parseval and unitarity of the linear flows.
  const TorusGrid g = TorusGrid::with_periods(8, 256);
  const Field f = testutil::random_field(g, 100, 4);
  double phys = 0.0, spec = 0.0;
  for (const auto& v : f.values()) phys += std::norm(v);
  for (const auto& v : f.spectrum()) spec += std::norm(v);
  phys /= static_cast<double>(g.size());
  double parseval = std::abs(phys - spec) / spec;
  double unitary = 0.0;
  for (const LinearFlow& flow : {LinearFlow{KgRescaled{0.125}}, LinearFlow{Schrodinger{}}, LinearFlow{KgPhysical{}}}) {
    const Field e = evolve_linear(f, 3.7, flow);
    double m = 0.0;
    for (const auto& v : e.spectrum()) m += std::norm(v);
    unitary = std::max(unitary, std::abs(m - spec) / spec);
    const Field back = evolve_linear(e, -3.7, flow);
    unitary = std::max(unitary, testutil::max_abs_diff(back.spectrum(), f.spectrum()) / testutil::max_abs(f.spectrum()));
  }
  if (!(parseval <= 1e-12 && unitary <= 1e-12)) o.passed = false;

  // Two runs with the same seed write identical data files.
  RunConfig c = RunConfig::defaults_for(Study::converge_linear);
  c.eps = {0.25, 0.125, 0.0625};
  c.profile = ProfileSpec::fourier_tail(1.0, 42);
  c.seed = 42;
  const fs::path base = fs::temp_directory_path() / "envlab_acceptance_rerun";
  fs::remove_all(base);
  const auto formats = parse_formats("csv,json,svg");
  const fs::path m1 = emit_outputs(run_study(c), formats, base / "a");
  const fs::path m2 = emit_outputs(run_study(c), formats, base / "b");
  std::size_t files = 0;
  bool identical = true;
  for (const auto& e : fs::directory_iterator(base / "a")) {
    if (e.path() == m1) continue;
    ++files;
    if (slurp(e.path()) != slurp(base / "b" / e.path().filename())) identical = false;
  }
  if (!fs::exists(m2) || files == 0) identical = false;
  fs::remove_all(base);
  if (!identical) o.passed = false;

  o.detail = "cubic vs convolution " + num(conv) + ", Parseval " + num(parseval) + ", unitarity " + num(unitary) +
             " (<= 1e-12); rerun " + std::to_string(files) + " files " + (identical ? "identical" : "DIFFER");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "exact-solution oracles", false, crit_oracles},
      {2, "energy and mass conservation", false, crit_conservation},
      {3, "dual-route identity", false, crit_dual_route},
      {4, "linear deviation rate, rough data", false, crit_linear_rate},
      {5, "NLKG-NLS error rate, smooth data", false, crit_smooth_rate},
      {6, "NLKG-NLS error rate, rough data", false, crit_rough_rate},
      {7, "H1/sqrt(eps) error decreasing", false, crit_h1_limit},
      {8, "remainder rates and conformance", true, crit_remainder},
      {9, "high-frequency core decay and contamination probe", false, crit_highfreq},
      {10, "dispersive decay rate", false, crit_decay},
      {11, "resonance kernel bound", true, crit_kernel},
      {12, "infrastructure invariants and reruns", false, crit_infrastructure},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int unexpected = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string note;
    if (c.known_gap && !o.passed) note = "  [known gap]";
    if (c.known_gap && o.passed) note = "  [known gap now passing]";
    if (!c.known_gap && !o.passed) ++unexpected;
    std::printf("%s  %2d %s: %s (%.1fs)%s\n", o.passed ? "PASS" : "FAIL", c.id, c.name.c_str(), o.detail.c_str(),
                secs, note.c_str());
    std::fflush(stdout);
  }
  std::printf("%d unexpected failure(s)\n", unexpected);
  return unexpected ? 1 : 0;
}
