#include "envlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>
#include <toml.hpp>

#include "util.hpp"

namespace envlab {

using ojson = nlohmann::ordered_json;

namespace {

const std::pair<Study, const char*> study_names[] = {
    {Study::converge_main, "converge-main"},   {Study::converge_linear, "converge-linear"},
    {Study::remainder_decay, "remainder-decay"}, {Study::highfreq_core, "highfreq-core"},
    {Study::kernel_bound, "kernel-bound"},     {Study::energy_drift, "energy-drift"},
    {Study::decay_probe, "decay-probe"},
};

template <class T>
void read_if(const ojson& j, const char* key, T& out) {
  if (!j.contains(key) || j[key].is_null()) return;
  try {
    out = j[key].get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

ojson profile_to_json(const ProfileSpec& p) {
  ojson j;
  j["family"] = to_string(p.family);
  j["amplitude"] = p.amplitude;
  j["width"] = p.width;
  j["center"] = p.center;
  j["s"] = p.s;
  j["cutoff"] = p.cutoff;
  j["window"] = p.window;
  j["contamination"] = p.contamination;
  j["contamination_factor"] = p.contamination_factor;
  return j;
}

void profile_from_json(const ojson& j, ProfileSpec& p) {
  if (j.contains("family")) p.family = profile_family_from_string(j["family"].get<std::string>());
  read_if(j, "amplitude", p.amplitude);
  read_if(j, "width", p.width);
  read_if(j, "center", p.center);
  read_if(j, "s", p.s);
  read_if(j, "cutoff", p.cutoff);
  read_if(j, "window", p.window);
  read_if(j, "contamination", p.contamination);
  read_if(j, "contamination_factor", p.contamination_factor);
}

// nlohmann prints doubles in shortest round-trip form already; this keeps the
// canonical text independent of locale and compact.
std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

ojson series_to_json(const Series& s) {
  ojson j;
  j["name"] = s.name;
  ojson pts = ojson::array();
  for (const auto& p : s.points) pts.push_back({p.eps, p.value});
  j["points"] = pts;
  j["slope"] = s.slope ? ojson(*s.slope) : ojson(nullptr);
  j["residual"] = s.residual ? ojson(*s.residual) : ojson(nullptr);
  j["predicted"] = s.predicted ? ojson(*s.predicted) : ojson(nullptr);
  j["law"] = s.law;
  return j;
}

std::optional<double> opt_double(const ojson& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

std::string to_string(Study study) {
  for (const auto& [s, name] : study_names) {
    if (s == study) return name;
  }
  return "unknown";
}

Study study_from_string(const std::string& name) {
  for (const auto& [s, n] : study_names) {
    if (name == n) return s;
  }
  throw ConfigError("unknown study '" + name + "'");
}

RunConfig RunConfig::defaults_for(Study study) {
  RunConfig c;
  c.study = study;
  c.profile = ProfileSpec::gaussian(1.0);
  switch (study) {
    case Study::converge_main:
      c.eps = {0.25, 0.125, 0.0625};
      break;
    case Study::converge_linear:
      c.eps = {0.25, 0.125, 0.0625, 0.03125, 0.015625};
      c.profile = ProfileSpec::fourier_tail(1.5);
      break;
    case Study::remainder_decay:
    case Study::highfreq_core:
      c.eps = {0.25, 0.125, 0.0625, 0.03125};
      break;
    case Study::kernel_bound:
      c.eps = {0.125, 0.0625};
      break;
    case Study::energy_drift:
      c.eps = {0.125};
      break;
    case Study::decay_probe:
      c.eps = {0.25};
      break;
  }
  return c;
}

RunConfig RunConfig::from_json_text(const std::string& text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be an object");
  if (!j.contains("study")) throw ConfigError("config lacks 'study'");
  RunConfig c = defaults_for(study_from_string(j["study"].get<std::string>()));
  read_if(j, "eps", c.eps);
  if (j.contains("profile")) profile_from_json(j["profile"], c.profile);
  read_if(j, "T", c.T);
  read_if(j, "periods", c.periods);
  read_if(j, "slow_n", c.slow_n);
  read_if(j, "phys_n", c.phys_n);
  if (j.contains("solver")) {
    const auto& s = j["solver"];
    read_if(s, "dt", c.solver.dt);
    if (s.contains("scheme")) c.solver.scheme = scheme_from_string(s["scheme"].get<std::string>());
    read_if(s, "sample_stride", c.solver.sample_stride);
    read_if(s, "energy_tolerance", c.solver.energy_tolerance);
  }
  read_if(j, "nls_dt", c.nls_dt);
  read_if(j, "deltas", c.deltas);
  read_if(j, "eta", c.eta);
  read_if(j, "time_samples", c.time_samples);
  if (j.contains("slope_band") && !j["slope_band"].is_null()) {
    const auto b = j["slope_band"].get<std::vector<double>>();
    if (b.size() != 2) throw ConfigError("slope_band must have two entries");
    c.slope_band = std::make_pair(b[0], b[1]);
  }
  if (j.contains("kernel")) {
    const auto& k = j["kernel"];
    read_if(k, "tau_points", c.kernel.tau_points);
    read_if(k, "xi_points", c.kernel.xi_points);
    read_if(k, "tolerance", c.kernel.tolerance);
    read_if(k, "max_panels", c.kernel.max_panels);
  }
  if (j.contains("decay")) {
    const auto& d = j["decay"];
    read_if(d, "N", c.decay.N);
    read_if(d, "t_min", c.decay.t_min);
    read_if(d, "t_max", c.decay.t_max);
    read_if(d, "points", c.decay.points);
  }
  std::string out;
  read_if(j, "out_dir", out);
  if (!out.empty()) c.out_dir = out;
  read_if(j, "seed", c.seed);
  c.profile.seed = c.seed;
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  if (path.extension() == ".toml") {
    try {
      const toml::table table = toml::parse(buf.str(), path.string());
      std::stringstream js;
      js << toml::json_formatter{table};
      return from_json_text(js.str());
    } catch (const toml::parse_error& e) {
      std::ostringstream msg;
      msg << "config " << path.string() << ": " << e.description() << " at line " << e.source().begin.line;
      throw ConfigError(msg.str());
    }
  }
  return from_json_text(buf.str());
}

std::string RunConfig::to_json_text() const {
  ojson j;
  j["study"] = to_string(study);
  j["eps"] = eps;
  j["profile"] = profile_to_json(profile);
  j["T"] = T;
  j["periods"] = periods;
  j["slow_n"] = slow_n;
  j["phys_n"] = phys_n;
  j["solver"] = {{"dt", solver.dt},
                 {"scheme", to_string(solver.scheme)},
                 {"sample_stride", solver.sample_stride},
                 {"energy_tolerance", solver.energy_tolerance}};
  j["nls_dt"] = nls_dt;
  j["deltas"] = deltas;
  j["eta"] = eta;
  j["time_samples"] = time_samples;
  j["slope_band"] = slope_band ? ojson::array({slope_band->first, slope_band->second}) : ojson(nullptr);
  j["kernel"] = {{"tau_points", kernel.tau_points},
                 {"xi_points", kernel.xi_points},
                 {"tolerance", kernel.tolerance},
                 {"max_panels", kernel.max_panels}};
  j["decay"] = {{"N", decay.N}, {"t_min", decay.t_min}, {"t_max", decay.t_max}, {"points", decay.points}};
  j["out_dir"] = out_dir.generic_string();
  j["seed"] = seed;
  return dump(j);
}

std::string RunConfig::hash() const { return detail::sha256_hex(to_json_text()); }

void RunConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (eps.empty()) fail("eps list is empty");
  for (double e : eps) {
    if (!(e > 0.0 && e <= 1.0)) fail("eps values must lie in (0, 1]");
    const double k = std::log2(1.0 / e);
    if (std::abs(k - std::round(k)) > 1e-12) fail("eps values must be dyadic (2^-k)");
    const double q = periods / e;
    if (std::abs(q - std::round(q)) > 1e-9 * q) fail("periods / eps must be an integer for every eps");
  }
  if (!(T > 0.0)) fail("T must be positive");
  if (!(periods >= 1.0) || std::abs(periods - std::round(periods)) > 0.0) fail("periods must be a positive integer");
  if (slow_n < 16 || (slow_n & (slow_n - 1)) != 0) fail("slow_n must be a power of two >= 16");
  if (phys_n != 0 && (phys_n & (phys_n - 1)) != 0) fail("phys_n must be a power of two (or 0 for automatic)");
  if (solver.dt < 0.0) fail("solver.dt must be non-negative (0 selects eps^2 / 8)");
  if (solver.sample_stride < 1) fail("solver.sample_stride must be >= 1");
  if (!(solver.energy_tolerance > 0.0)) fail("solver.energy_tolerance must be positive");
  if (nls_dt < 0.0) fail("nls_dt must be non-negative");
  if (!(eta > 0.0 && eta < 0.25)) fail("eta must lie in (0, 1/4)");
  if (time_samples < 2) fail("time_samples must be >= 2");
  for (double d : deltas) {
    if (!(d > 0.0)) fail("deltas must be positive");
  }
  if (slope_band && !(slope_band->first <= slope_band->second)) fail("slope_band must be [lo, hi] with lo <= hi");
  if (study == Study::kernel_bound) {
    for (double e : eps) {
      if (e < 1.0 / 32) fail("kernel-bound needs eps >= 1/32");
    }
    if (kernel.tau_points < 1 || kernel.xi_points < 1) fail("kernel sample grid is empty");
    if (!(kernel.tolerance > 0.0)) fail("kernel.tolerance must be positive");
    if (kernel.max_panels < 2) fail("kernel.max_panels must be >= 2");
  }
  if (study == Study::decay_probe) {
    if (!(decay.N > 0.0)) fail("decay.N must be positive");
    if (!(decay.t_min > 0.0 && decay.t_max > decay.t_min)) fail("decay times must satisfy 0 < t_min < t_max");
    if (decay.points < 2) fail("decay.points must be >= 2");
  }
}

bool ConvergenceReport::passed() const {
  if (!failures.empty()) return false;
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

std::string ConvergenceReport::to_json_text() const {
  ojson j;
  j["study"] = study;
  j["config_hash"] = config_hash;
  j["config"] = config_json.empty() ? ojson(nullptr) : ojson::parse(config_json);
  ojson ser = ojson::array();
  for (const auto& s : series) ser.push_back(series_to_json(s));
  j["series"] = ser;
  ojson chk = ojson::array();
  for (const auto& c : checks) chk.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  j["checks"] = chk;
  ojson tab = ojson::array();
  for (const auto& t : tables) tab.push_back({{"name", t.name}, {"columns", t.columns}, {"rows", t.rows}});
  j["tables"] = tab;
  j["failures"] = failures;
  j["passed"] = passed();
  return dump(j);
}

ConvergenceReport ConvergenceReport::from_json_text(const std::string& text) {
  const ojson j = ojson::parse(text);
  ConvergenceReport r;
  r.study = j["study"].get<std::string>();
  r.config_hash = j["config_hash"].get<std::string>();
  if (!j["config"].is_null()) r.config_json = dump(j["config"]);
  for (const auto& s : j["series"]) {
    Series x;
    x.name = s["name"].get<std::string>();
    for (const auto& p : s["points"]) x.points.push_back({p[0].get<double>(), p[1].get<double>()});
    x.slope = opt_double(s["slope"]);
    x.residual = opt_double(s["residual"]);
    x.predicted = opt_double(s["predicted"]);
    x.law = s["law"].get<std::string>();
    r.series.push_back(std::move(x));
  }
  for (const auto& c : j["checks"]) {
    r.checks.push_back({c["name"].get<std::string>(), c["passed"].get<bool>(), c["detail"].get<std::string>()});
  }
  for (const auto& t : j["tables"]) {
    r.tables.push_back({t["name"].get<std::string>(), t["columns"].get<std::vector<std::string>>(),
                        t["rows"].get<std::vector<std::vector<double>>>()});
  }
  r.failures = j["failures"].get<std::vector<std::string>>();
  return r;
}

SlopeFit fit_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw std::invalid_argument("fit_slope: need at least 2 points");
  const double n = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [h, v] : points) {
    if (!(h > 0.0) || !(v > 0.0)) throw std::invalid_argument("fit_slope: points must be positive");
    mx += std::log(h);
    my += std::log(v);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [h, v] : points) {
    sxx += (std::log(h) - mx) * (std::log(h) - mx);
    sxy += (std::log(h) - mx) * (std::log(v) - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_slope: abscissae must not all coincide");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  double ss = 0.0;
  for (const auto& [h, v] : points) {
    const double d = std::log(v) - (my + fit.slope * (std::log(h) - mx));
    ss += d * d;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

std::size_t worker_count(std::size_t tasks) {
  std::size_t cap = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("ENVELOPE_LAB_THREADS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) {
      throw ConfigError(std::string("ENVELOPE_LAB_THREADS must be a positive integer, got '") + env + "'");
    }
    cap = static_cast<std::size_t>(v);
  }
  return std::max<std::size_t>(1, std::min(cap, tasks));
}

ConvergenceReport run_study(const RunConfig& cfg) {
  switch (cfg.study) {
    case Study::converge_main:
      return run_main_convergence(cfg);
    case Study::converge_linear:
      return run_linear_convergence(cfg);
    case Study::remainder_decay:
      return run_remainder_decay(cfg);
    case Study::highfreq_core:
      return run_highfreq_core(cfg);
    case Study::kernel_bound:
      return run_kernel_bound(cfg);
    case Study::energy_drift:
      return run_energy_drift(cfg);
    case Study::decay_probe:
      return run_decay_probe(cfg);
  }
  throw ConfigError("unknown study");
}

}  // namespace envlab
