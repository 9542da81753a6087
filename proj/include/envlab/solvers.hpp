#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "envlab/field.hpp"
#include "envlab/propagators.hpp"

namespace envlab {

enum class Scheme { integrating_factor_rk4, etd_rk4, strang_split, composition4 };

std::string to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& name);

struct SolverConfig {
  double dt = 1e-2;
  Scheme scheme = Scheme::integrating_factor_rk4;
  /// Keep every sample_stride-th step (the first and last states are always kept).
  int sample_stride = 1;
  /// Certified relative energy drift; drift above 100x this is flagged.
  double energy_tolerance = 1e-7;
  /// Amplitude system only: drop the remainder equation (r stays zero).
  bool core_only = false;

  void validate() const;
};

/// Linear symbol omega(xi) and cubic coefficient kappa of
/// u_tt + omega(D)^2 u + kappa u^3 = 0.
struct KgScale {
  bool rescaled = false;
  double eps = 1.0;

  static KgScale physical() { return {false, 1.0}; }
  static KgScale rescaled_by(double eps);

  double omega(double xi) const noexcept;
  double kappa() const noexcept { return rescaled ? 1.0 / (eps * eps) : 1.0; }
  bool operator==(const KgScale&) const = default;
};

struct KGState {
  double t = 0.0;
  /// Half-wave variable with u = 2 Re W.
  Field W;
  KgScale scale;
};

struct AmplitudeState {
  double t = 0.0;
  Field psi;
  Field r;
  double eps = 1.0;

  Field amplitude() const { return psi + r; }
};

struct NLSState {
  double t = 0.0;
  Field psi;
};

struct TrajectoryInfo {
  Scheme scheme = Scheme::integrating_factor_rk4;
  double dt = 0.0;
  std::size_t steps = 0;
  double energy_initial = 0.0;
  /// Largest relative drift of the conserved quantity over the samples.
  double max_relative_drift = 0.0;
  bool drift_flagged = false;
};

template <class State>
struct Trajectory {
  std::vector<State> samples;
  TrajectoryInfo info;

  const State& back() const { return samples.back(); }
};

template <class State>
using StepObserver = std::function<void(const State&)>;

/// W = 1/2 (u + i omega(D)^-1 u_t).
Field complexify(const Field& u, const Field& u_t, const KgScale& scale);

/// (u, u_t) = (2 Re W, 2 Re W_t) where W_t follows the equation; since the
/// nonlinear part of W_t is purely imaginary this is (2 Re W, 2 omega Im W).
std::pair<Field, Field> decomplexify(const Field& W, const KgScale& scale);

/// Conserved energy of a KG state (physical or rescaled form per its scale).
double kg_energy(const KGState& state);

/// Integrates u_tt + omega^2 u + kappa u^3 = 0 in half-wave form. The cubic is
/// evaluated without aliasing; the Nyquist mode is removed.
Trajectory<KGState> solve_kg(const KGState& state0, double t_end, const SolverConfig& cfg,
                             const StepObserver<KGState>& observer = {});

/// Core/remainder amplitude system, r(0) = 0. The grid must carry 1/eps as a
/// lattice frequency and resolve -4/eps.
Trajectory<AmplitudeState> solve_amplitude(const Field& psi0, double eps, double t_end,
                                           const SolverConfig& cfg,
                                           const StepObserver<AmplitudeState>& observer = {});

/// i psi_t + 1/(4 sqrt 2) psi_xx - 3/(2 sqrt 2) |psi|^2 psi = 0.
Trajectory<NLSState> solve_nls(const Field& psi0, double t_end, const SolverConfig& cfg,
                               const StepObserver<NLSState>& observer = {});

/// Physical state to the rescaled frame: x -> eps x, t -> eps^2 t, v = u / eps.
KGState to_rescaled(const KGState& physical, double eps);

/// Amplitude A(t, x) of a rescaled KG state, on the state's grid:
/// W = T_a[exp(i x / eps - i a / eps) A] with a = t / (eps sqrt 2).
Field demodulate(const KGState& state, const WavePacketParams& params);

/// Spectral pad/truncate onto another grid of the same length.
Field resample(const Field& f, const TorusGrid& target);

/// Smallest power-of-two grid size on a 2 pi P torus whose Nyquist frequency is
/// at least 6/eps (what the amplitude system needs), and at least min_n.
std::size_t amplitude_grid_size(double periods, double eps, std::size_t min_n = 16);

struct SnapshotMeta {
  std::string kind;
  double eps = 1.0;
  std::string scheme;
  double dt = 0.0;
};

/// Appends one little-endian record (t f64, n u32, n x (re, im) f64).
void append_snapshot(std::ostream& out, double t, const Field& f);

struct Snapshot {
  double t;
  std::vector<cplx> values;
};

std::vector<Snapshot> read_snapshots(const std::filesystem::path& path);

/// Writes all records to path and a JSON sidecar path + ".json" with grid,
/// metadata, record count and the SHA-256 of the binary file.
void write_snapshot_file(const std::filesystem::path& path, const std::vector<std::pair<double, Field>>& records,
                         const SnapshotMeta& meta);

}  // namespace envlab
