// Command-line driver for the studies and single solver runs.
#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "envlab/ansatz.hpp"
#include "envlab/experiments.hpp"
#include "envlab/version.hpp"

namespace {

constexpr int exit_config = 2;
constexpr int exit_numerical = 3;
constexpr int exit_threshold = 4;

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string format = "csv,json,svg";
  std::string eps;
  std::string profile;
  bool check = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON or TOML run configuration");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--seed", f.seed, "Seed for random profiles");
  cmd->add_option("--format", f.format, "Comma list of csv, json, svg")->capture_default_str();
  cmd->add_option("--eps", f.eps, "Comma list of eps values (dyadic)");
  cmd->add_option("--profile", f.profile, "gaussian, sech, fourier_tail or highfreq_contaminated");
  cmd->add_flag("--check", f.check, "Exit with status 4 when an acceptance check fails");
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      // Accept fractions like 1/8 as well as decimals.
      const auto slash = item.find('/');
      if (slash != std::string::npos) {
        v = std::stod(item.substr(0, slash)) / std::stod(item.substr(slash + 1));
        used = item.size();
      } else {
        v = std::stod(item, &used);
      }
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw envlab::ConfigError("cannot parse number '" + item + "'");
    out.push_back(v);
  }
  return out;
}

envlab::RunConfig build_config(envlab::Study study, const CommonFlags& f) {
  envlab::RunConfig cfg = f.config.empty() ? envlab::RunConfig::defaults_for(study) : envlab::RunConfig::load(f.config);
  if (cfg.study != study) {
    throw envlab::ConfigError("config file is for study '" + envlab::to_string(cfg.study) + "', not '" +
                              envlab::to_string(study) + "'");
  }
  if (!f.eps.empty()) cfg.eps = parse_list(f.eps);
  if (!f.profile.empty()) cfg.profile.family = envlab::profile_family_from_string(f.profile);
  if (f.seed) {
    cfg.seed = *f.seed;
    cfg.profile.seed = *f.seed;
  }
  if (!f.out.empty()) cfg.out_dir = f.out;
  cfg.validate();
  return cfg;
}

int run_study_command(envlab::Study study, const CommonFlags& f) {
  const envlab::RunConfig cfg = build_config(study, f);
  const auto formats = envlab::parse_formats(f.format);
  const envlab::ConvergenceReport report = envlab::run_study(cfg);
  const auto manifest = envlab::emit_outputs(report, formats, cfg.out_dir);

  for (const auto& s : report.series) {
    std::cout << s.name;
    for (const auto& p : s.points) std::printf("  [%g: %.6e]", p.eps, p.value);
    if (s.slope) std::printf("  slope %.4f", *s.slope);
    if (s.predicted) std::printf(" (predicted %.4f)", *s.predicted);
    std::cout << "\n";
  }
  for (const auto& c : report.checks) {
    std::cout << (c.passed ? "PASS  " : "FAIL  ") << c.name << ": " << c.detail << "\n";
  }
  for (const auto& e : report.failures) std::cerr << "failure: " << e << "\n";
  std::cout << "manifest: " << manifest.string() << "\n";

  if (!report.failures.empty()) return exit_numerical;
  if (f.check && !report.passed()) return exit_threshold;
  return 0;
}

struct SolveFlags {
  std::string kind = "kg";
  double eps = 0.125;
  double T = 1.0;
  double dt = 0.0;
  std::string scheme;
  std::string profile = "gaussian";
  double amplitude = 1.0;
  double periods = 16.0;
  std::size_t slow_n = 1024;
  int snapshots = 16;
  std::string out = "out";
  std::uint64_t seed = 0;
};

int run_solve(const SolveFlags& f) {
  using namespace envlab;
  ProfileSpec spec;
  spec.family = profile_family_from_string(f.profile);
  spec.amplitude = f.amplitude;
  spec.seed = f.seed;
  if (f.snapshots < 1) throw ConfigError("--snapshots must be >= 1");

  SolverConfig cfg;
  cfg.dt = f.dt > 0.0 ? f.dt : f.eps * f.eps / 8.0;
  std::vector<std::pair<double, Field>> records;
  std::string kind = f.kind;
  double dt_used = cfg.dt;

  auto stride = [&](double t_end, double dt) {
    const double steps = std::ceil(t_end / dt - 1e-9);
    return std::max(1, static_cast<int>(steps / f.snapshots));
  };

  if (kind == "nls") {
    const TorusGrid g = TorusGrid::with_periods(f.periods, f.slow_n);
    cfg.scheme = f.scheme.empty() ? Scheme::composition4 : scheme_from_string(f.scheme);
    cfg.dt = f.dt > 0.0 ? f.dt : f.T / 256.0;
    dt_used = cfg.dt;
    cfg.sample_stride = stride(f.T, cfg.dt);
    const auto traj = solve_nls(make_profile(spec, g, f.eps), f.T, cfg);
    for (const auto& s : traj.samples) records.emplace_back(s.t, s.psi);
    std::printf("nls: %zu steps, mass drift %.3e\n", traj.info.steps, traj.info.max_relative_drift);
  } else if (kind == "amplitude") {
    const TorusGrid g = TorusGrid::with_periods(f.periods, amplitude_grid_size(f.periods, f.eps, f.slow_n));
    if (!f.scheme.empty()) cfg.scheme = scheme_from_string(f.scheme);
    cfg.sample_stride = stride(f.T, cfg.dt);
    const auto traj = solve_amplitude(make_profile(spec, g, f.eps), f.eps, f.T, cfg);
    for (const auto& s : traj.samples) records.emplace_back(s.t, s.amplitude());
    std::printf("amplitude: %zu steps on n=%zu\n", traj.info.steps, g.size());
  } else if (kind == "kg") {
    const TorusGrid slow = TorusGrid::with_periods(f.periods, f.slow_n);
    const Field psi0 = make_profile(spec, slow, f.eps);
    const std::size_t np = std::bit_ceil(static_cast<std::size_t>(std::ceil(f.slow_n / f.eps - 1e-9)));
    const TorusGrid phys = physical_grid(slow, f.eps, np);
    const auto [u0, ut0] = build_initial_data(psi0, f.eps, phys);
    if (!f.scheme.empty()) cfg.scheme = scheme_from_string(f.scheme);
    cfg.dt = cfg.dt / (f.eps * f.eps);
    dt_used = cfg.dt;
    const double t_end = f.T / (f.eps * f.eps);
    cfg.sample_stride = stride(t_end, cfg.dt);
    const KGState s0{0.0, complexify(u0, ut0, KgScale::physical()), KgScale::physical()};
    const auto traj = solve_kg(s0, t_end, cfg);
    for (const auto& s : traj.samples) records.emplace_back(s.t, s.W);
    std::printf("kg: %zu steps on n=%zu, energy drift %.3e%s\n", traj.info.steps, phys.size(),
                traj.info.max_relative_drift, traj.info.drift_flagged ? " (flagged)" : "");
  } else {
    throw ConfigError("--kind must be kg, nls or amplitude");
  }

  const std::filesystem::path path = std::filesystem::path(f.out) / (kind + "_snapshots.bin");
  std::filesystem::create_directories(f.out);
  write_snapshot_file(path, records, SnapshotMeta{kind, f.eps, to_string(cfg.scheme), dt_used});
  std::printf("wrote %zu snapshots to %s\n", records.size(), path.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"envelope_lab: wave-packet envelope approximation studies"};
  app.set_version_flag("--version", envlab::version_string);
  app.require_subcommand(1);

  struct Entry {
    envlab::Study study;
    const char* help;
    CommonFlags flags;
    CLI::App* cmd = nullptr;
  };
  std::vector<Entry> entries = {
      {envlab::Study::converge_main, "NLKG vs NLS approximant error along an eps sweep", {}},
      {envlab::Study::converge_linear, "Linear flow vs free Schrodinger flow deviation", {}},
      {envlab::Study::remainder_decay, "Remainder size in the core/remainder amplitude system", {}},
      {envlab::Study::highfreq_core, "High-frequency part of the core profile", {}},
      {envlab::Study::kernel_bound, "Quadrature check of the resonance kernel bound", {}},
      {envlab::Study::energy_drift, "Energy conservation of the rescaled NLKG solver", {}},
      {envlab::Study::decay_probe, "L^inf decay of a frequency-localized linear wave", {}},
  };
  for (auto& e : entries) {
    e.cmd = app.add_subcommand(envlab::to_string(e.study), e.help);
    add_common(e.cmd, e.flags);
  }

  SolveFlags solve;
  CLI::App* solve_cmd = app.add_subcommand("solve", "Single solver run with snapshot dumps");
  solve_cmd->add_option("--kind", solve.kind, "kg, nls or amplitude")->capture_default_str();
  solve_cmd->add_option("--eps", solve.eps, "eps (dyadic)")->capture_default_str();
  solve_cmd->add_option("--T", solve.T, "Slow-time horizon")->capture_default_str();
  solve_cmd->add_option("--dt", solve.dt, "Step in slow time (0: automatic)")->capture_default_str();
  solve_cmd->add_option("--scheme", solve.scheme, "integrating_factor_rk4, etd_rk4, strang_split, composition4");
  solve_cmd->add_option("--profile", solve.profile, "Profile family")->capture_default_str();
  solve_cmd->add_option("--amplitude", solve.amplitude, "H_eps^1 norm of the profile")->capture_default_str();
  solve_cmd->add_option("--periods", solve.periods, "Slow torus length / 2 pi")->capture_default_str();
  solve_cmd->add_option("--slow-n", solve.slow_n, "Slow grid size")->capture_default_str();
  solve_cmd->add_option("--snapshots", solve.snapshots, "Approximate number of stored snapshots")
      ->capture_default_str();
  solve_cmd->add_option("--out", solve.out, "Output directory")->capture_default_str();
  solve_cmd->add_option("--seed", solve.seed, "Seed for random profiles");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_config;
  }

  try {
    if (solve_cmd->parsed()) return run_solve(solve);
    for (const auto& e : entries) {
      if (e.cmd->parsed()) return run_study_command(e.study, e.flags);
    }
  } catch (const envlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const envlab::NumericalFailure& e) {
    std::cerr << "numerical failure at t=" << e.last_good_time() << ": " << e.what() << "\n";
    return exit_numerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
