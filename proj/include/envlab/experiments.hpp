#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "envlab/ansatz.hpp"
#include "envlab/solvers.hpp"

namespace envlab {

/// Study names accepted by RunConfig::study (also the CLI subcommands).
enum class Study {
  converge_main,
  converge_linear,
  remainder_decay,
  highfreq_core,
  kernel_bound,
  energy_drift,
  decay_probe,
};

std::string to_string(Study study);
Study study_from_string(const std::string& name);

struct KernelSettings {
  std::size_t tau_points = 17;
  std::size_t xi_points = 17;
  /// Relative agreement required between successive panel refinements.
  double tolerance = 1e-4;
  std::size_t max_panels = 256;
};

struct DecaySettings {
  double N = 1.0;
  double t_min = 1e2;
  double t_max = 1e4;
  std::size_t points = 9;
};

/// Everything a study needs. Defaults depend on the study; see defaults_for.
struct RunConfig {
  Study study = Study::converge_main;
  std::vector<double> eps;
  ProfileSpec profile;
  /// Slow-time horizon, shared by every eps in the sweep.
  double T = 1.0;
  /// Slow torus length 2 pi periods and slow grid size.
  double periods = 16.0;
  std::size_t slow_n = 1024;
  /// Physical grid size; 0 means slow_n / eps rounded up to a power of two.
  std::size_t phys_n = 0;
  /// dt is in rescaled (slow) time; 0 means eps^2 / 8.
  SolverConfig solver{0.0};
  /// Step of the NLS reference run; 0 means T / 256.
  double nls_dt = 0.0;
  std::vector<double> deltas{0.5, 1.0, 2.0};
  double eta = 0.05;
  std::size_t time_samples = 64;
  /// Overrides the slope acceptance band of the headline series.
  std::optional<std::pair<double, double>> slope_band;
  KernelSettings kernel;
  DecaySettings decay;
  std::filesystem::path out_dir = "out";
  std::uint64_t seed = 0;

  static RunConfig defaults_for(Study study);

  /// Reads JSON or TOML (by extension; .toml is TOML, anything else JSON).
  /// Keys absent from the file keep the study defaults.
  static RunConfig load(const std::filesystem::path& path);
  static RunConfig from_json_text(const std::string& text);

  /// Canonical JSON text (fixed key order, %.17g numbers).
  std::string to_json_text() const;
  /// SHA-256 of the canonical JSON text.
  std::string hash() const;

  /// Throws ConfigError on bad parameters or incommensurate eps values.
  void validate() const;
};

struct SeriesPoint {
  double eps = 0.0;
  double value = 0.0;
};

/// One measured quantity along the eps sweep.
struct Series {
  std::string name;
  std::vector<SeriesPoint> points;
  /// Present when there are at least 3 points, all positive.
  std::optional<double> slope;
  std::optional<double> residual;
  std::optional<double> predicted;
  /// Human-readable law behind `predicted`, e.g. "eps^(3/2 - eta)".
  std::string law;
};

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Extra numeric table emitted next to a report (kernel samples, bound pieces).
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct RuntimeStats {
  double wall_seconds = 0.0;
  std::size_t threads = 1;
  /// (eps, seconds) for each per-eps task.
  std::vector<std::pair<double, double>> per_eps_seconds;
};

struct ConvergenceReport {
  std::string study;
  std::string config_hash;
  std::string config_json;
  std::vector<Series> series;
  std::vector<Check> checks;
  std::vector<Table> tables;
  /// Per-eps solver failures; the remaining points are still reported.
  std::vector<std::string> failures;
  /// Kept out of the JSON report so reruns are byte-identical; see the manifest.
  RuntimeStats runtime;

  bool passed() const;
  /// Lossless JSON text of everything except runtime.
  std::string to_json_text() const;
  static ConvergenceReport from_json_text(const std::string& text);
};

struct SlopeFit {
  double slope = 0.0;
  double residual = 0.0;
};

/// Least-squares line through (log h, log value); residual is the RMS deviation.
SlopeFit fit_slope(const std::vector<std::pair<double, double>>& points);

ConvergenceReport run_main_convergence(const RunConfig& cfg);
ConvergenceReport run_linear_convergence(const RunConfig& cfg);
ConvergenceReport run_remainder_decay(const RunConfig& cfg);
ConvergenceReport run_highfreq_core(const RunConfig& cfg);
ConvergenceReport run_energy_drift(const RunConfig& cfg);
ConvergenceReport run_decay_probe(const RunConfig& cfg);

/// Runs the physical NLKG (then rescales and demodulates it) and the
/// core/remainder amplitude system from the same profile, both at dt = eps^2/8,
/// and returns the largest relative L^2 gap between the two envelopes over
/// `samples` evenly spaced times in [0, T].
double dual_route_gap(const ProfileSpec& profile, double eps, double T, double periods, std::size_t slow_n,
                      std::size_t samples);

struct KernelSample {
  double eps = 0.0;
  double eta = 0.0;
  int sign = 1;
  double tau = 0.0;
  double xi = 0.0;
  double value = 0.0;
  double bound = 0.0;
  double ratio = 0.0;
  bool converged = false;
  std::size_t panels = 0;
};

struct KernelQuadrature {
  double value = 0.0;
  bool converged = false;
  std::size_t panels = 0;
};

/// The trilinear resonance integral over the hexagon |xi1|, |xi2|,
/// |xi - xi1 - xi2| <= 1/(50 eps), with the +- sign on the xi1 bracket.
/// swap_order integrates over xi1 innermost instead of xi2.
KernelQuadrature kernel_integral(double eps, double eta, int sign, double tau, double xi,
                                 const KernelSettings& settings, bool swap_order = false);

/// max over +-1/10 of <tau + (2 sqrt2 + sign sqrt2 +- 1/10) / eps^2>^-(1 - 2 eta).
double kernel_bound_value(double eps, double eta, int sign, double tau);

std::vector<KernelSample> kernel_samples(const RunConfig& cfg);
ConvergenceReport run_kernel_bound(const RunConfig& cfg);

/// Dispatches on cfg.study.
ConvergenceReport run_study(const RunConfig& cfg);

enum class OutputFormat { csv, json, svg };
std::vector<OutputFormat> parse_formats(const std::string& list);

struct Artifact {
  std::filesystem::path path;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

/// Writes <study>.csv/.json/.svg (as requested), one CSV per table, and
/// <study>_manifest.json listing every artifact with its SHA-256. All writes
/// are atomic. Returns the manifest path.
std::filesystem::path emit_outputs(const ConvergenceReport& report, const std::vector<OutputFormat>& formats,
                                   const std::filesystem::path& dir);

/// Worker count for per-eps tasks: ENVELOPE_LAB_THREADS if set, else the
/// hardware concurrency, and never more than `tasks`.
std::size_t worker_count(std::size_t tasks);

}  // namespace envlab
