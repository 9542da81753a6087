#pragma once

#include <numbers>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "envlab/field.hpp"

namespace envlab {

/// Carrier data of the wave packet: k = 1, omega = <k> = sqrt(2),
/// group velocity c_g = k / <k> = 1/sqrt(2).
struct WavePacketParams {
  double eps;

  static constexpr double k = 1.0;
  static constexpr double omega = std::numbers::sqrt2;
  static constexpr double c_g = 1.0 / std::numbers::sqrt2;

  explicit WavePacketParams(double eps);
};

/// p_eps(xi) = eps^-2 (<1 + eps xi> - sqrt(2) - eps xi / sqrt(2)).
double p_symbol(double xi, double eps);

/// q(xi) = xi^2 / (4 sqrt(2)).
double schrodinger_symbol(double xi) noexcept;

struct KgRescaled {
  double eps;
};
struct Schrodinger {};
struct KgPhysical {};
/// Shift by a per unit time: symbol a * xi.
struct Translation {
  double a;
};

using LinearFlow = std::variant<KgRescaled, Schrodinger, KgPhysical, Translation>;

double flow_symbol(const LinearFlow& flow, double xi);

/// Spectrum multiplied by exp(-i t symbol(xi_j)).
Field evolve_linear(const Field& f, double t, const LinearFlow& flow);

/// max over t in {T0 k / (samples - 1)} of |S_eps(t) u0 - exp(-i t q(D)) u0|_{L^2}.
double linear_deviation(const Field& u0, double eps, double T0, int samples);

struct DecayProbeOptions {
  /// Grid to run on; chosen automatically from the velocity spread when empty.
  std::optional<TorusGrid> grid;
  /// Fraction of total mass allowed near the antipode of the packet.
  double wrap_tolerance = 1e-6;
};

struct DecayProbeResult {
  TorusGrid grid;
  /// |P_N u0|_{L^inf}
  double initial_sup;
  /// |S_eps(t) P_N u0|_{L^inf} per requested time.
  std::vector<double> sup;
};

/// Dispersive decay of the smooth Littlewood-Paley piece P_N of a unit-mass
/// near-delta (spectrum flat on |xi| <= 8N). Throws NumericalFailure naming
/// the first time at which the dispersed wave reaches the antipode.
DecayProbeResult decay_probe(double N, double eps, std::span<const double> times,
                             const DecayProbeOptions& options = {});

}  // namespace envlab
