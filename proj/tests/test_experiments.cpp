#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>
#include <json.hpp>

#include "envlab/experiments.hpp"

using namespace envlab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("envlab_test_" + name);
  fs::remove_all(d);
  return d;
}

// Small, fast configs; only the plumbing is under test here.
RunConfig quick(Study study) {
  RunConfig c = RunConfig::defaults_for(study);
  c.eps = {0.5, 0.25};
  c.periods = 4;
  c.slow_n = 64;
  c.T = 0.125;
  c.time_samples = 4;
  return c;
}

}  // namespace

TEST_CASE("fit_slope on exact power laws") {
  SUBCASE("slope 2, zero residual") {
    const auto f = fit_slope({{0.5, 0.25}, {0.25, 0.0625}, {0.125, 0.015625}});
    CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(f.residual < 1e-14);
  }
  SUBCASE("constant data") {
    const auto f = fit_slope({{0.5, 3.0}, {0.25, 3.0}, {0.125, 3.0}});
    CHECK(std::abs(f.slope) < 1e-14);
  }
  SUBCASE("collinear in log space") {
    std::vector<std::pair<double, double>> pts;
    for (double h : {0.3, 0.1, 0.07, 0.01}) pts.emplace_back(h, 5.0 * std::pow(h, 1.45));
    const auto f = fit_slope(pts);
    CHECK(f.slope == doctest::Approx(1.45).epsilon(1e-12));
    CHECK(f.residual < 1e-12);
  }
  SUBCASE("noisy data has a positive residual") {
    const auto f = fit_slope({{0.5, 0.3}, {0.25, 0.0625}, {0.125, 0.02}});
    CHECK(f.residual > 0.01);
  }
  CHECK_THROWS_AS(fit_slope({{0.5, 0.0}, {0.25, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(fit_slope({{-0.5, 1.0}, {0.25, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(fit_slope({{0.5, 1.0}}), std::invalid_argument);
}

TEST_CASE("study names round trip") {
  for (Study s : {Study::converge_main, Study::converge_linear, Study::remainder_decay, Study::highfreq_core,
                  Study::kernel_bound, Study::energy_drift, Study::decay_probe}) {
    CHECK(study_from_string(to_string(s)) == s);
  }
  CHECK(to_string(Study::converge_main) == "converge-main");
  CHECK_THROWS_AS(study_from_string("nope"), ConfigError);
}

TEST_CASE("config JSON round trip and hash") {
  RunConfig c = RunConfig::defaults_for(Study::remainder_decay);
  c.eps = {0.25, 0.125};
  c.profile = ProfileSpec::fourier_tail(0.5, 7);
  c.slope_band = std::make_pair(0.3, 0.7);
  c.seed = 7;
  const std::string text = c.to_json_text();
  const RunConfig d = RunConfig::from_json_text(text);
  CHECK(d.to_json_text() == text);
  CHECK(d.hash() == c.hash());
  CHECK(c.hash().size() == 64);

  RunConfig e = c;
  e.eta = 0.06;
  CHECK(e.hash() != c.hash());

  // Absent keys fall back to the study defaults.
  const RunConfig m = RunConfig::from_json_text(R"({"study": "highfreq-core", "eps": [0.25]})");
  CHECK(m.deltas == std::vector<double>{0.5, 1.0, 2.0});
  CHECK(m.eps == std::vector<double>{0.25});

  CHECK_THROWS_AS(RunConfig::from_json_text("{"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json_text("[1]"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json_text(R"({"eps": [0.5]})"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json_text(R"({"study": "converge-main", "slope_band": [1]})"), ConfigError);
}

TEST_CASE("config TOML and JSON files load the same run") {
  const fs::path dir = scratch_dir("cfg");
  fs::create_directories(dir);
  {
    std::ofstream(dir / "a.toml") << "study = \"converge-linear\"\n"
                                     "eps = [0.25, 0.125, 0.0625]\n"
                                     "T = 0.5\n"
                                     "[profile]\nfamily = \"fourier_tail\"\ns = 0.75\n";
    std::ofstream(dir / "a.json")
        << R"({"study": "converge-linear", "eps": [0.25, 0.125, 0.0625], "T": 0.5,
               "profile": {"family": "fourier_tail", "s": 0.75}})";
  }
  const RunConfig t = RunConfig::load(dir / "a.toml");
  const RunConfig j = RunConfig::load(dir / "a.json");
  CHECK(t.to_json_text() == j.to_json_text());
  CHECK(t.profile.s == 0.75);
  CHECK(t.T == 0.5);
  CHECK_THROWS_AS(RunConfig::load(dir / "missing.json"), ConfigError);
  {
    std::ofstream(dir / "bad.toml") << "study = \n";
  }
  CHECK_THROWS_AS(RunConfig::load(dir / "bad.toml"), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("config validation") {
  auto bad = [](auto mutate) {
    RunConfig c = RunConfig::defaults_for(Study::converge_main);
    mutate(c);
    return c;
  };
  CHECK_NOTHROW(RunConfig::defaults_for(Study::converge_main).validate());
  CHECK_THROWS_AS(bad([](RunConfig& c) { c.eps = {}; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](RunConfig& c) { c.eps = {0.3}; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](RunConfig& c) { c.eps = {2.0}; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](RunConfig& c) { c.periods = 2.5; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](RunConfig& c) { c.T = 0.0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](RunConfig& c) { c.slow_n = 100; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](RunConfig& c) { c.phys_n = 1000; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](RunConfig& c) { c.eta = 0.3; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](RunConfig& c) { c.time_samples = 1; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](RunConfig& c) { c.deltas = {1.0, -1.0}; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](RunConfig& c) { c.slope_band = std::make_pair(2.0, 1.0); }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](RunConfig& c) { c.solver.dt = -1.0; }).validate(), ConfigError);

  RunConfig k = RunConfig::defaults_for(Study::kernel_bound);
  k.eps = {1.0 / 64};
  CHECK_THROWS_AS(k.validate(), ConfigError);
  RunConfig d = RunConfig::defaults_for(Study::decay_probe);
  d.decay.t_max = d.decay.t_min;
  CHECK_THROWS_AS(d.validate(), ConfigError);
}

TEST_CASE("worker_count honours the environment") {
  ::setenv("ENVELOPE_LAB_THREADS", "3", 1);
  CHECK(worker_count(10) == 3);
  CHECK(worker_count(2) == 2);
  ::setenv("ENVELOPE_LAB_THREADS", "1", 1);
  CHECK(worker_count(10) == 1);
  ::unsetenv("ENVELOPE_LAB_THREADS");
  CHECK(worker_count(10) >= 1);
  CHECK(worker_count(0) == 1);
}

TEST_CASE("parse_formats") {
  CHECK(parse_formats("csv,svg") == std::vector<OutputFormat>{OutputFormat::csv, OutputFormat::svg});
  CHECK(parse_formats("").empty());
  CHECK_THROWS_AS(parse_formats("csv,xml"), ConfigError);
}

namespace {

ConvergenceReport sample_report() {
  ConvergenceReport r;
  r.study = "converge-main";
  r.config_json = RunConfig::defaults_for(Study::converge_main).to_json_text();
  r.config_hash = "abc";
  Series s{"l2_error", {{0.25, 0.1}, {0.125, 1.0 / 3.0}, {0.0625, 0.0123456789012345678}}, 1.4, 0.01, 1.45,
           "eps^(3/2 - eta)"};
  r.series = {s, Series{"bare", {{0.5, 1e-300}}, std::nullopt, std::nullopt, std::nullopt, ""}};
  r.checks = {{"slope in band", true, "slope 1.4"}, {"other", false, ""}};
  r.tables = {{"pieces", {"a", "b"}, {{1.0, 2.0 / 3.0}, {-0.0, 1e-17}}}};
  r.failures = {"eps=0.0625: numerical failure"};
  return r;
}

}  // namespace

TEST_CASE("report JSON round trip is lossless") {
  const ConvergenceReport r = sample_report();
  const std::string text = r.to_json_text();
  const ConvergenceReport q = ConvergenceReport::from_json_text(text);
  CHECK(q.to_json_text() == text);
  REQUIRE(q.series.size() == 2);
  CHECK(q.series[0].points[1].value == r.series[0].points[1].value);
  CHECK(q.series[0].points[2].value == r.series[0].points[2].value);
  CHECK(*q.series[0].predicted == 1.45);
  CHECK_FALSE(q.series[1].slope.has_value());
  CHECK(q.tables[0].rows[0][1] == 2.0 / 3.0);
  CHECK(q.failures == r.failures);
  CHECK_FALSE(r.passed());

  ConvergenceReport ok;
  ok.checks = {{"a", true, ""}};
  CHECK(ok.passed());
  ok.failures = {"x"};
  CHECK_FALSE(ok.passed());
}

TEST_CASE("emit_outputs: empty report writes only the manifest") {
  const fs::path dir = scratch_dir("empty");
  ConvergenceReport r;
  r.study = "decay-probe";
  const fs::path m = emit_outputs(r, {OutputFormat::csv, OutputFormat::json, OutputFormat::svg}, dir);
  CHECK(m == dir / "decay-probe_manifest.json");
  const auto j = nlohmann::json::parse(slurp(m));
  CHECK(j["artifacts"].empty());
  CHECK(j["study"] == "decay-probe");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++files;
  CHECK(files == 1);
  fs::remove_all(dir);
}

TEST_CASE("emit_outputs: CSV is exact, manifest hashes match, reruns are identical") {
  const fs::path a = scratch_dir("emit_a"), b = scratch_dir("emit_b");
  ConvergenceReport r = sample_report();
  r.runtime.wall_seconds = 1.0;
  const fs::path ma = emit_outputs(r, {OutputFormat::csv, OutputFormat::json, OutputFormat::svg}, a);
  r.runtime.wall_seconds = 2.0;
  emit_outputs(r, {OutputFormat::csv, OutputFormat::json, OutputFormat::svg}, b);

  // Data files identical; only the manifest carries timings.
  for (const char* name : {"converge-main.csv", "converge-main.json", "converge-main.svg", "converge-main_pieces.csv"}) {
    REQUIRE(fs::exists(a / name));
    CHECK(slurp(a / name) == slurp(b / name));
  }

  std::istringstream csv(slurp(a / "converge-main.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "series,eps,value");
  std::vector<double> values;
  while (std::getline(csv, line)) values.push_back(std::stod(line.substr(line.rfind(',') + 1)));
  REQUIRE(values.size() == 4);
  CHECK(values[1] == 1.0 / 3.0);
  CHECK(values[2] == 0.0123456789012345678);
  CHECK(values[3] == 1e-300);

  const auto j = nlohmann::json::parse(slurp(ma));
  CHECK(j["artifacts"].size() == 4);
  for (const auto& art : j["artifacts"]) {
    const std::string text = slurp(a / art["path"].get<std::string>());
    CHECK(art["bytes"].get<std::size_t>() == text.size());
    CHECK(art["sha256"].get<std::string>().size() == 64);
  }
  CHECK(j["runtime"]["wall_seconds"] == 1.0);

  // Only requested formats are written.
  const fs::path c = scratch_dir("emit_c");
  emit_outputs(r, {OutputFormat::json}, c);
  CHECK(fs::exists(c / "converge-main.json"));
  CHECK_FALSE(fs::exists(c / "converge-main.csv"));
  for (const auto& d : {a, b, c}) fs::remove_all(d);
}

TEST_CASE("kernel integrand quadrature") {
  const KernelSettings ks;
  const double eps = 0.125, eta = 0.05;
  for (int sign : {1, -1}) {
    const double centre = -(2.0 * std::sqrt(2.0) + sign * std::sqrt(2.0)) / (eps * eps);
    for (double tau : {centre - 100.0, centre, centre + 50.0}) {
      for (double xi : {0.0, 0.2}) {
        const auto q = kernel_integral(eps, eta, sign, tau, xi, ks);
        const auto p = kernel_integral(eps, eta, sign, tau, xi, ks, true);
        CHECK(q.converged);
        CHECK(q.value > 0.0);
        CHECK(p.value == doctest::Approx(q.value).epsilon(1e-3));
      }
    }
  }
  // Far from resonance the integrand is tiny and nearly constant: area * <y>^-2(1-eta).
  const double R = 1.0 / (50.0 * eps);
  const double tau = 1e6;
  const double y = tau + 3.0 * std::sqrt(2.0) / (eps * eps);
  const auto q = kernel_integral(eps, eta, 1, tau, 0.0, ks);
  CHECK(q.value == doctest::Approx(3.0 * R * R * std::pow(1.0 + y * y, -(1.0 - eta))).epsilon(1e-3));

  // Bound value: maximal (= 1) when tau sits on a shifted resonance.
  CHECK(kernel_bound_value(eps, eta, 1, -(3.0 * std::sqrt(2.0) + 0.1) / (eps * eps)) == doctest::Approx(1.0));
  const double far = std::hypot(1.0, (3.0 * std::sqrt(2.0) - 0.1) / (eps * eps));
  CHECK(kernel_bound_value(eps, eta, 1, 0.0) == doctest::Approx(std::pow(far, -(1.0 - 2.0 * eta))));
}

TEST_CASE("studies on zero data report zeros") {
  SUBCASE("remainder") {
    RunConfig c = quick(Study::remainder_decay);
    c.profile.amplitude = 0.0;
    const auto r = run_remainder_decay(c);
    CHECK(r.failures.empty());
    REQUIRE(r.series.size() == 1);
    for (const auto& p : r.series[0].points) CHECK(p.value == 0.0);
  }
  SUBCASE("energy drift") {
    RunConfig c = quick(Study::energy_drift);
    c.eps = {0.25};
    c.profile.amplitude = 0.0;
    const auto r = run_energy_drift(c);
    CHECK(r.failures.empty());
    for (const auto& s : r.series) {
      for (const auto& p : s.points) CHECK(p.value == 0.0);
    }
  }
}

TEST_CASE("band-limited core has no high part at t = 0") {
  RunConfig c = quick(Study::highfreq_core);
  c.T = 1e-3;
  c.solver.dt = 1e-3;
  c.time_samples = 2;
  c.deltas = {8.0};
  c.profile = ProfileSpec::gaussian(1.0);
  c.profile.amplitude = 1e-3;
  const auto r = run_highfreq_core(c);
  CHECK(r.failures.empty());
  // With N = 8 eps^-1/3 above the data's effective band the sharp norm stays at the Gaussian tail level.
  for (const auto& p : r.series[0].points) CHECK(p.value < 1e-10);
}

TEST_CASE("quick main convergence run produces a complete report") {
  RunConfig c = quick(Study::converge_main);
  c.eps = {0.5, 0.25, 0.125};
  c.periods = 4;
  c.slow_n = 64;
  const auto r = run_main_convergence(c);
  CHECK(r.failures.empty());
  REQUIRE(r.series.size() == 2);
  CHECK(r.series[0].points.size() == 3);
  CHECK(r.series[0].slope.has_value());
  CHECK(r.config_hash == c.hash());
  CHECK(r.runtime.per_eps_seconds.size() == 3);
  for (const auto& p : r.series[0].points) CHECK(std::isfinite(p.value));
}

TEST_CASE("run_study dispatches on the study") {
  RunConfig c = quick(Study::converge_linear);
  c.eps = {0.5, 0.25, 0.125};
  c.profile = ProfileSpec::gaussian();
  const auto r = run_study(c);
  CHECK(r.study == "converge-linear");
  CHECK(r.series.at(0).name == "linear_deviation");
  c.eps = {0.3};
  CHECK_THROWS_AS(run_study(c), ConfigError);
}
