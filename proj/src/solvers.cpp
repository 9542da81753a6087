#include "envlab/solvers.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "dealias.hpp"
#include "envlab/spectral.hpp"
#include "fft.hpp"
#include "integrators.hpp"
#include "util.hpp"

namespace envlab {

namespace {

constexpr double sqrt2 = std::numbers::sqrt2;

void zero_nyquist(std::span<cplx> spectrum) { spectrum[spectrum.size() / 2] = 0.0; }

bool all_finite(std::span<const cplx> y) {
  double sum = 0.0;
  for (const auto& v : y) sum += std::abs(v.real()) + std::abs(v.imag());
  return std::isfinite(sum);
}

struct Monitor {
  std::function<double(double t, std::span<const cplx> y)> quantity;
};

template <class State>
Trajectory<State> integrate(detail::Semilinear problem, ComplexVector y, double t_end,
                            const SolverConfig& cfg, double t0,
                            const std::function<State(double, std::span<const cplx>)>& make_state,
                            const Monitor& monitor, const StepObserver<State>& observer) {
  cfg.validate();
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) {
    throw std::invalid_argument("solver: t_end must be finite and non-negative");
  }
  if (!all_finite(y)) throw NumericalFailure("solver: initial data is not finite", t0);

  std::size_t steps = 0;
  double h = cfg.dt;
  if (t_end > 0.0) {
    steps = static_cast<std::size_t>(std::ceil(t_end / cfg.dt - 1e-9));
    steps = std::max<std::size_t>(steps, 1);
    h = t_end / static_cast<double>(steps);
  }

  Trajectory<State> traj;
  traj.info.scheme = cfg.scheme;
  traj.info.dt = h;
  traj.info.steps = steps;

  double q0 = 0.0;
  auto record = [&](double t) {
    State s = make_state(t, y);
    if (monitor.quantity) {
      const double q = monitor.quantity(t, y);
      if (traj.samples.empty()) {
        q0 = q;
        traj.info.energy_initial = q;
      } else {
        const double scale = q0 != 0.0 ? std::abs(q0) : 1.0;
        traj.info.max_relative_drift = std::max(traj.info.max_relative_drift, std::abs(q - q0) / scale);
      }
    }
    traj.samples.push_back(std::move(s));
  };

  record(t0);
  if (observer) observer(traj.samples.back());
  if (steps == 0) return traj;

  detail::Stepper stepper(std::move(problem), cfg.scheme, h);
  const auto stride = static_cast<std::size_t>(cfg.sample_stride);
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t_prev = t0 + static_cast<double>(k - 1) * h;
    stepper.step(t_prev, y);
    if (!all_finite(y)) {
      std::ostringstream msg;
      msg << "solver: non-finite state after step " << k << " (t = " << t_prev + h << ")";
      throw NumericalFailure(msg.str(), t_prev);
    }
    const double t = t0 + static_cast<double>(k) * h;
    const bool sample = k % stride == 0 || k == steps;
    if (sample) {
      record(t);
      if (observer) observer(traj.samples.back());
    } else if (observer) {
      observer(make_state(t, y));
    }
  }
  traj.info.drift_flagged = traj.info.max_relative_drift > 100.0 * cfg.energy_tolerance;
  return traj;
}

// Buffers for one padded cubic evaluation; owned by a single solve.
struct PaddedWork {
  std::size_t n, m;
  ComplexVector pad, a, b, c;

  PaddedWork(std::size_t n_, std::size_t m_) : n(n_), m(m_), pad(m_), a(m_), b(m_), c(m_) {}

  void to_values(std::span<const cplx> spectrum, ComplexVector& out) {
    detail::pad_spectrum(spectrum, pad);
    fft::backward(pad, out);
  }
  void to_spectrum(const ComplexVector& values, std::span<cplx> out) {
    fft::forward(values, pad);
    detail::truncate_spectrum(pad, out);
  }
};

void require_real(const Field& f, const char* where) {
  if (!f.is_real()) throw std::invalid_argument(std::string(where) + ": expected a real field");
}

}  // namespace

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::integrating_factor_rk4:
      return "integrating_factor_rk4";
    case Scheme::etd_rk4:
      return "etd_rk4";
    case Scheme::strang_split:
      return "strang_split";
    case Scheme::composition4:
      return "composition4";
  }
  return "unknown";
}

Scheme scheme_from_string(const std::string& name) {
  for (Scheme s : {Scheme::integrating_factor_rk4, Scheme::etd_rk4, Scheme::strang_split,
                   Scheme::composition4}) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError("unknown scheme '" + name + "'");
}

void SolverConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("solver: dt must be positive");
  if (sample_stride < 1) throw ConfigError("solver: sample_stride must be >= 1");
  if (!(energy_tolerance > 0.0)) throw ConfigError("solver: energy_tolerance must be positive");
}

KgScale KgScale::rescaled_by(double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("KgScale: eps must lie in (0, 1]");
  return {true, eps};
}

double KgScale::omega(double xi) const noexcept {
  return rescaled ? bracket(eps * xi) / (eps * eps) : bracket(xi);
}

Field complexify(const Field& u, const Field& u_t, const KgScale& scale) {
  require_real(u, "complexify");
  require_real(u_t, "complexify");
  require_same_grid(u, u_t, "complexify");
  const TorusGrid& grid = u.grid();
  const auto a = u.spectrum();
  const auto b = u_t.spectrum();
  ComplexVector w(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    w[i] = 0.5 * (a[i] + cplx(0.0, 1.0) * b[i] / scale.omega(grid.frequency(i)));
  }
  return Field::adopt_spectrum(grid, std::move(w), false);
}

std::pair<Field, Field> decomplexify(const Field& W, const KgScale& scale) {
  const Field u = W.real_part() * 2.0;
  const Field u_t = apply_multiplier(W.imag_part(), [&](double xi) { return 2.0 * scale.omega(xi); });
  return {u, u_t};
}

double kg_energy(const KGState& state) {
  const auto [u, u_t] = decomplexify(state.W, state.scale);
  return state.scale.rescaled ? energy_rescaled(u, u_t, state.scale.eps) : energy_physical(u, u_t);
}

Trajectory<KGState> solve_kg(const KGState& state0, double t_end, const SolverConfig& cfg,
                             const StepObserver<KGState>& observer) {
  const TorusGrid grid = state0.W.grid();
  const KgScale scale = state0.scale;
  const std::size_t n = grid.size();

  detail::Semilinear problem;
  problem.lambda.resize(n);
  ComplexVector coupling(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = scale.omega(grid.frequency(i));
    problem.lambda[i] = w;
    coupling[i] = cplx(0.0, -0.5 * scale.kappa() / w);
  }
  coupling[n / 2] = 0.0;

  auto work = std::make_shared<PaddedWork>(n, 2 * n);
  problem.nonlinear = [work, coupling](double, std::span<const cplx> y, std::span<cplx> out) {
    work->to_values(y, work->a);
    for (auto& v : work->a) {
      const double u = 2.0 * v.real();
      v = u * u * u;
    }
    work->to_spectrum(work->a, out);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= coupling[i];
  };
  // u = 2 Re W is frozen along the cubic sub-flow, so the kick is exact.
  problem.nonlinear_flow = [work, coupling](double, double h, std::span<cplx> y) {
    work->to_values(y, work->a);
    for (auto& v : work->a) {
      const double u = 2.0 * v.real();
      v = u * u * u;
    }
    ComplexVector kick(y.size());
    work->to_spectrum(work->a, kick);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += h * coupling[i] * kick[i];
  };

  const auto s0 = state0.W.spectrum();
  ComplexVector y(s0.begin(), s0.end());
  zero_nyquist(y);

  auto make_state = [&grid, scale](double t, std::span<const cplx> v) {
    return KGState{t, Field::from_spectrum(grid, v), scale};
  };
  Monitor monitor{[&grid, scale](double t, std::span<const cplx> v) {
    return kg_energy(KGState{t, Field::from_spectrum(grid, v), scale});
  }};
  return integrate<KGState>(std::move(problem), std::move(y), t_end, cfg, state0.t, make_state,
                            monitor, observer);
}

Trajectory<AmplitudeState> solve_amplitude(const Field& psi0, double eps, double t_end,
                                           const SolverConfig& cfg,
                                           const StepObserver<AmplitudeState>& observer) {
  if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("solve_amplitude: eps must lie in (0, 1]");
  cfg.validate();
  const TorusGrid grid = psi0.grid();
  const auto shift = grid.lattice_index(1.0 / eps);
  if (!shift) {
    std::ostringstream msg;
    msg << "solve_amplitude: 2/eps is not a lattice frequency (eps = " << eps
        << ", L = " << grid.length() << ")";
    throw ConfigError(msg.str());
  }
  if (!(grid.nyquist() > 4.0 / eps)) {
    throw ConfigError("solve_amplitude: grid does not resolve the frequency -4/eps; use at least " +
                      std::to_string(amplitude_grid_size(grid.periods(), eps)) + " points");
  }
  if (cfg.dt > eps * eps / 8.0 * (1.0 + 1e-12)) {
    throw ConfigError("solve_amplitude: dt must not exceed eps^2/8");
  }

  const std::size_t n = grid.size();
  const auto s1 = static_cast<std::size_t>(*shift);
  const std::size_t m = fft::next_smooth_size(2 * n + 4 * s1 + 1);

  detail::Semilinear problem;
  problem.lambda.resize(2 * n);
  ComplexVector coupling(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = grid.frequency(i);
    problem.lambda[i] = problem.lambda[n + i] = p_symbol(xi, eps);
    coupling[i] = cplx(0.0, -1.5 / bracket(1.0 + eps * xi));
  }
  coupling[n / 2] = 0.0;

  // exp(2 i x / eps) and exp(-4 i x / eps) on the padded nodes, exact index arithmetic.
  ComplexVector carrier2(m), carrier4(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double a2 = 2.0 * std::numbers::pi * static_cast<double>((2 * s1 * k) % m) / double(m);
    const double a4 = 2.0 * std::numbers::pi * static_cast<double>((4 * s1 * k) % m) / double(m);
    carrier2[k] = std::polar(1.0, a2);
    carrier4[k] = std::polar(1.0, -a4);
  }

  struct Work {
    PaddedWork pw;
    ComplexVector nr;
  };
  auto work = std::make_shared<Work>(Work{PaddedWork(n, m), ComplexVector(m)});
  const bool core_only = cfg.core_only;
  const double freq = 1.0 / (eps * eps * sqrt2);
  problem.nonlinear = [=](double t, std::span<const cplx> y, std::span<cplx> out) {
    auto& w = *work;
    auto& psi = w.pw.a;
    auto& r = w.pw.b;
    auto& npsi = w.pw.c;
    w.pw.to_values(y.subspan(0, n), psi);
    if (!core_only) w.pw.to_values(y.subspan(n, n), r);
    const cplx ph2 = std::polar(1.0, -2.0 * freq * t);
    const cplx ph4 = std::polar(1.0, 4.0 * freq * t);
    for (std::size_t k = 0; k < m; ++k) {
      const cplx p = psi[k];
      const cplx cubic_psi = std::norm(p) * p;
      npsi[k] = cubic_psi;
      if (core_only) continue;
      const cplx A = p + r[k];
      const cplx Ac = std::conj(A);
      const double a2 = std::norm(A);
      const cplx e2 = carrier2[k] * ph2;
      const cplx e4 = carrier4[k] * ph4;
      w.nr[k] = a2 * A - cubic_psi + e2 * (A * A * A) / 3.0 + std::conj(e2) * a2 * Ac +
                e4 * (Ac * Ac * Ac) / 3.0;
    }
    w.pw.to_spectrum(npsi, out.subspan(0, n));
    for (std::size_t i = 0; i < n; ++i) out[i] *= coupling[i];
    if (core_only) {
      std::fill(out.begin() + static_cast<std::ptrdiff_t>(n), out.end(), cplx(0.0, 0.0));
      return;
    }
    w.pw.to_spectrum(w.nr, out.subspan(n, n));
    for (std::size_t i = 0; i < n; ++i) out[n + i] *= coupling[i];
  };

  ComplexVector y(2 * n, cplx(0.0, 0.0));
  const auto s0 = psi0.spectrum();
  std::copy(s0.begin(), s0.end(), y.begin());
  zero_nyquist(std::span<cplx>(y).subspan(0, n));

  auto make_state = [&grid, eps, n](double t, std::span<const cplx> v) {
    return AmplitudeState{t, Field::from_spectrum(grid, v.subspan(0, n)),
                          Field::from_spectrum(grid, v.subspan(n, n)), eps};
  };
  return integrate<AmplitudeState>(std::move(problem), std::move(y), t_end, cfg, 0.0, make_state,
                                   Monitor{}, observer);
}

Trajectory<NLSState> solve_nls(const Field& psi0, double t_end, const SolverConfig& cfg,
                               const StepObserver<NLSState>& observer) {
  const TorusGrid grid = psi0.grid();
  const std::size_t n = grid.size();
  const double g = 3.0 / (2.0 * sqrt2);

  detail::Semilinear problem;
  problem.lambda.resize(n);
  for (std::size_t i = 0; i < n; ++i) problem.lambda[i] = schrodinger_symbol(grid.frequency(i));

  auto work = std::make_shared<PaddedWork>(n, 2 * n);
  problem.nonlinear = [work, g](double, std::span<const cplx> y, std::span<cplx> out) {
    work->to_values(y, work->a);
    for (auto& v : work->a) v = cplx(0.0, -g) * std::norm(v) * v;
    work->to_spectrum(work->a, out);
    zero_nyquist(out);
  };
  auto values = std::make_shared<ComplexVector>(n);
  problem.nonlinear_flow = [values, g](double, double h, std::span<cplx> y) {
    fft::backward(y, *values);
    for (auto& v : *values) v *= std::polar(1.0, -g * std::norm(v) * h);
    fft::forward(*values, y);
  };

  const auto s0 = psi0.spectrum();
  ComplexVector y(s0.begin(), s0.end());
  const bool split = cfg.scheme == Scheme::strang_split || cfg.scheme == Scheme::composition4;
  if (!split) zero_nyquist(y);

  auto make_state = [&grid](double t, std::span<const cplx> v) {
    return NLSState{t, Field::from_spectrum(grid, v)};
  };
  Monitor monitor{[&grid](double, std::span<const cplx> v) {
    double sum = 0.0;
    for (const auto& c : v) sum += std::norm(c);
    return grid.length() * sum;
  }};
  return integrate<NLSState>(std::move(problem), std::move(y), t_end, cfg, 0.0, make_state, monitor,
                             observer);
}

KGState to_rescaled(const KGState& physical, double eps) {
  if (physical.scale.rescaled) throw std::invalid_argument("to_rescaled: state is already rescaled");
  if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("to_rescaled: eps must lie in (0, 1]");
  const TorusGrid& pg = physical.W.grid();
  const TorusGrid rg(pg.length() * eps, pg.size());
  const auto s = physical.W.spectrum();
  ComplexVector w(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) w[i] = s[i] / eps;
  return KGState{physical.t * eps * eps, Field::adopt_spectrum(rg, std::move(w), false),
                 KgScale::rescaled_by(eps)};
}

Field demodulate(const KGState& state, const WavePacketParams& params) {
  if (!state.scale.rescaled || std::abs(state.scale.eps - params.eps) > 1e-15 * params.eps) {
    throw std::invalid_argument("demodulate: state must be rescaled with the same eps");
  }
  const double eps = params.eps;
  const TorusGrid& grid = state.W.grid();
  const auto shift = grid.lattice_index(1.0 / eps);
  if (!shift) throw ConfigError("demodulate: 1/eps is not a lattice frequency");
  const double a = state.t / (eps * sqrt2);
  const cplx frame = std::polar(1.0, a / eps);
  const auto s = state.W.spectrum();
  const std::size_t n = s.size();
  ComplexVector out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const long j = grid.wavenumber(i);
    const std::size_t src = grid.index_of(j + *shift);
    out[i] = frame * std::polar(1.0, a * grid.frequency(src)) * s[src];
  }
  return Field::adopt_spectrum(grid, std::move(out), false);
}

Field resample(const Field& f, const TorusGrid& target) {
  const TorusGrid& src = f.grid();
  if (std::abs(src.length() - target.length()) > 1e-12 * src.length()) {
    throw std::invalid_argument("resample: grids must have the same length");
  }
  const auto s = f.spectrum();
  const long half = static_cast<long>(src.size() / 2);
  ComplexVector out(target.size(), cplx(0.0, 0.0));
  for (std::size_t i = 0; i < target.size(); ++i) {
    const long j = target.wavenumber(i);
    if (j >= -half && j < half) out[i] = s[src.index_of(j)];
  }
  return Field::adopt_spectrum(target, std::move(out), f.is_real());
}

std::size_t amplitude_grid_size(double periods, double eps, std::size_t min_n) {
  const double need = 12.0 * periods / eps;
  std::size_t n = std::max<std::size_t>(min_n, 16);
  while (static_cast<double>(n) < need - 1e-9) n *= 2;
  return n;
}

namespace {

template <class T>
void put_le(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
bool get_le(std::istream& in, T& value) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) return false;
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  std::memcpy(&value, bytes, sizeof(T));
  return true;
}

}  // namespace

void append_snapshot(std::ostream& out, double t, const Field& f) {
  const auto v = f.values();
  put_le<double>(out, t);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(v.size()));
  for (const auto& c : v) {
    put_le<double>(out, c.real());
    put_le<double>(out, c.imag());
  }
}

std::vector<Snapshot> read_snapshots(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read snapshot file " + path.string());
  std::vector<Snapshot> out;
  double t;
  while (get_le(in, t)) {
    std::uint32_t n = 0;
    if (!get_le(in, n)) throw std::runtime_error("truncated snapshot record in " + path.string());
    Snapshot s{t, std::vector<cplx>(n)};
    for (auto& c : s.values) {
      double re, im;
      if (!get_le(in, re) || !get_le(in, im)) {
        throw std::runtime_error("truncated snapshot record in " + path.string());
      }
      c = cplx(re, im);
    }
    out.push_back(std::move(s));
  }
  return out;
}

void write_snapshot_file(const std::filesystem::path& path,
                         const std::vector<std::pair<double, Field>>& records, const SnapshotMeta& meta) {
  std::ostringstream bin;
  for (const auto& [t, f] : records) append_snapshot(bin, t, f);
  const std::string bytes = bin.str();
  detail::write_file_atomic(path, bytes);

  nlohmann::ordered_json side;
  side["format"] = "le-f64 t, u32 n, n x (f64 re, f64 im)";
  side["kind"] = meta.kind;
  side["records"] = records.size();
  if (!records.empty()) {
    const TorusGrid& g = records.front().second.grid();
    side["grid"] = {{"length", g.length()}, {"periods", g.periods()}, {"n", g.size()}};
  }
  side["eps"] = meta.eps;
  side["scheme"] = meta.scheme;
  side["dt"] = meta.dt;
  side["sha256"] = detail::sha256_hex(bytes);
  auto sidecar = path;
  sidecar += ".json";
  detail::write_file_atomic(sidecar, side.dump(2) + "\n");
}

}  // namespace envlab
