#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "envlab/field.hpp"
#include "envlab/solvers.hpp"

namespace envlab {

/// Initial profile families on the slow grid.
///
/// gaussian: exp(-(x - c)^2 / (2 width^2)); sech: sech((x - c) / width).
/// fourier_tail: spectrum magnitude <xi>^(-s - 1/2 - 0.01) up to `cutoff`
///   with seeded random phases, times a Gaussian window of width `window`.
/// highfreq_contaminated: gaussian plus a Gaussian bump modulated to the
///   lattice frequency nearest contamination_factor * eps^(-1/3), carrying
///   the fraction `contamination` of the base H_eps^1 norm.
/// Every profile is scaled so that |psi0|_{H_eps^1} = amplitude.
struct ProfileSpec {
  enum class Family { gaussian, sech, fourier_tail, highfreq_contaminated };

  Family family = Family::gaussian;
  double amplitude = 1.0;
  double width = 1.0;
  /// Center; negative means the middle of the torus.
  double center = -1.0;
  double s = 1.5;
  /// Largest tail frequency; 0 means 3/4 of the grid's Nyquist frequency.
  double cutoff = 0.0;
  double window = 4.0;
  double contamination = 0.5;
  double contamination_factor = 2.0;
  std::uint64_t seed = 0;

  static ProfileSpec gaussian(double width = 1.0, double amplitude = 1.0);
  static ProfileSpec fourier_tail(double s, std::uint64_t seed = 0, double amplitude = 1.0);
  static ProfileSpec contaminated(double fraction = 0.5, double amplitude = 1.0);
};

std::string to_string(ProfileSpec::Family family);
ProfileSpec::Family profile_family_from_string(const std::string& name);

Field make_profile(const ProfileSpec& spec, const TorusGrid& grid, double eps);

/// Frequency of the contamination bump actually used (lattice-snapped).
double contamination_frequency(const ProfileSpec& spec, const TorusGrid& grid, double eps);

/// z = eps psi(eps (x - c_g t)) exp(i (x - sqrt(2) t)) on the physical grid,
/// by exact re-indexing of the slow spectrum. t = 0 gives the initial carrier.
Field carrier_packet(const Field& psi_slow, double eps, const TorusGrid& phys, double t = 0.0);

/// (u0, u_t0) = (z + conj z, <D>(-i z + conj(-i z))) with z = carrier_packet(psi0).
std::pair<Field, Field> build_initial_data(const Field& psi0_slow, double eps, const TorusGrid& phys);

/// Physical torus matching a slow grid: length L_s / eps, n points.
TorusGrid physical_grid(const TorusGrid& slow, double eps, std::size_t n);

/// NLS profile at slow time s from stored samples; between samples the two
/// neighbours are carried by the free flow to s and blended linearly.
Field nls_profile_at(const Trajectory<NLSState>& traj, double s);

/// eps psi(eps^2 t, eps (x - c_g t)) exp(i (x - sqrt(2) t)) + c.c. at physical time t.
Field nls_approximant(const Trajectory<NLSState>& traj, double t_phys, double eps,
                      const TorusGrid& phys);

struct ErrorFunctionalSpec {
  enum class Mode { h1_scaled, l2 };
  Mode mode = Mode::l2;
  /// Slow-time horizon; physical samples up to T / eps^2 are used.
  double T = 1.0;
};

/// Norm of a difference in the requested mode (H^1 divided by sqrt(eps), or L^2).
double error_norm(const Field& difference, double eps, ErrorFunctionalSpec::Mode mode);

/// max_k |a_k - b_k| over paired samples (same times).
double trajectory_distance(const std::vector<std::pair<double, Field>>& a,
                           const std::vector<std::pair<double, Field>>& b, double eps,
                           ErrorFunctionalSpec::Mode mode);

/// max over KG samples with t <= T / eps^2 of |u(t) - approximant(t)|.
double approximation_error(const Trajectory<KGState>& kg, const Trajectory<NLSState>& nls, double eps,
                           const ErrorFunctionalSpec& spec);

}  // namespace envlab
