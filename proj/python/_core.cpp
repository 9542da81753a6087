// Python bindings: thin wrappers over the core library, NumPy in and out.
#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <span>
#include <vector>

#include "envlab/ansatz.hpp"
#include "envlab/experiments.hpp"
#include "envlab/propagators.hpp"
#include "envlab/spectral.hpp"
#include "envlab/version.hpp"

namespace py = pybind11;
using namespace envlab;

namespace {

using CArray = py::array_t<cplx, py::array::c_style | py::array::forcecast>;

Field to_field(const TorusGrid& g, const CArray& a) {
  if (a.ndim() != 1 || static_cast<std::size_t>(a.shape(0)) != g.size()) {
    throw std::invalid_argument("expected a 1-d array of length " + std::to_string(g.size()));
  }
  return Field::from_values(g, std::span<const cplx>(a.data(), g.size()));
}

CArray to_array(std::span<const cplx> s) {
  CArray out(static_cast<py::ssize_t>(s.size()));
  std::copy(s.begin(), s.end(), out.mutable_data());
  return out;
}

ProfileSpec profile_from(const std::string& family, double amplitude, double s, std::uint64_t seed) {
  ProfileSpec p;
  p.family = profile_family_from_string(family);
  p.amplitude = amplitude;
  p.s = s;
  p.seed = seed;
  return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Wave-packet envelope approximation lab (C++ core)";
  m.attr("__version__") = version_string;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalFailure>(m, "NumericalFailure", PyExc_RuntimeError);

  m.def("p_symbol", py::vectorize(&p_symbol), py::arg("xi"), py::arg("eps"),
        "Rescaled KG symbol eps^-2 (<1 + eps xi> - sqrt2 - eps xi / sqrt2).");
  m.def("schrodinger_symbol", py::vectorize([](double xi) { return schrodinger_symbol(xi); }), py::arg("xi"));

  m.def(
      "grid_points",
      [](double periods, std::size_t n) {
        const TorusGrid g = TorusGrid::with_periods(periods, n);
        py::array_t<double> x(static_cast<py::ssize_t>(n));
        for (std::size_t i = 0; i < n; ++i) x.mutable_data()[i] = g.node(i);
        return x;
      },
      py::arg("periods"), py::arg("n"));

  m.def(
      "make_profile",
      [](const std::string& family, double periods, std::size_t n, double eps, double amplitude, double s,
         std::uint64_t seed) {
        return to_array(make_profile(profile_from(family, amplitude, s, seed), TorusGrid::with_periods(periods, n), eps)
                            .values());
      },
      py::arg("family"), py::arg("periods"), py::arg("n"), py::arg("eps"), py::arg("amplitude") = 1.0,
      py::arg("s") = 1.5, py::arg("seed") = 0, "Profile samples on the slow grid, normalized in H_eps^1.");

  m.def(
      "dealiased_cubic",
      [](const CArray& f, const CArray& g, const CArray& h, double periods, std::array<bool, 3> conj) {
        const TorusGrid grid = TorusGrid::with_periods(periods, static_cast<std::size_t>(f.shape(0)));
        return to_array(dealiased_cubic(to_field(grid, f), to_field(grid, g), to_field(grid, h), conj).values());
      },
      py::arg("f"), py::arg("g"), py::arg("h"), py::arg("periods") = 1.0,
      py::arg("conj") = std::array<bool, 3>{false, false, false});

  m.def(
      "linear_deviation",
      [](const CArray& u0, double periods, double eps, double T, int samples) {
        const TorusGrid grid = TorusGrid::with_periods(periods, static_cast<std::size_t>(u0.shape(0)));
        return linear_deviation(to_field(grid, u0), eps, T, samples);
      },
      py::arg("u0"), py::arg("periods"), py::arg("eps"), py::arg("T") = 1.0, py::arg("samples") = 64);

  m.def(
      "fit_slope",
      [](const std::vector<double>& h, const std::vector<double>& v) {
        if (h.size() != v.size()) throw std::invalid_argument("fit_slope: length mismatch");
        std::vector<std::pair<double, double>> pts;
        for (std::size_t i = 0; i < h.size(); ++i) pts.emplace_back(h[i], v[i]);
        const auto f = fit_slope(pts);
        return std::make_pair(f.slope, f.residual);
      },
      py::arg("h"), py::arg("values"), "Least-squares log-log slope and RMS residual.");

  m.def(
      "dual_route_gap",
      [](const std::string& family, double eps, double T, double periods, std::size_t slow_n, std::size_t samples) {
        py::gil_scoped_release release;
        return dual_route_gap(profile_from(family, 1.0, 1.5, 0), eps, T, periods, slow_n, samples);
      },
      py::arg("family") = "gaussian", py::arg("eps") = 0.25, py::arg("T") = 1.0, py::arg("periods") = 16.0,
      py::arg("slow_n") = 256, py::arg("samples") = 16);

  m.def(
      "kernel_integral",
      [](double eps, double eta, int sign, double tau, double xi) {
        const auto q = kernel_integral(eps, eta, sign, tau, xi, KernelSettings{});
        return py::make_tuple(q.value, q.converged, q.panels);
      },
      py::arg("eps"), py::arg("eta"), py::arg("sign"), py::arg("tau"), py::arg("xi"));

  m.def(
      "default_config",
      [](const std::string& study) { return RunConfig::defaults_for(study_from_string(study)).to_json_text(); },
      py::arg("study"), "Canonical JSON text of the study defaults.");

  m.def(
      "run_study",
      [](const std::string& config_json) {
        const RunConfig cfg = RunConfig::from_json_text(config_json);
        std::string out;
        {
          py::gil_scoped_release release;
          out = run_study(cfg).to_json_text();
        }
        return out;
      },
      py::arg("config_json"), "Runs a study from JSON config text; returns the report as JSON text.");

  m.def(
      "emit_outputs",
      [](const std::string& report_json, const std::string& formats, const std::string& dir) {
        return emit_outputs(ConvergenceReport::from_json_text(report_json), parse_formats(formats), dir).string();
      },
      py::arg("report_json"), py::arg("formats"), py::arg("out_dir"), "Writes report files; returns the manifest path.");
}
