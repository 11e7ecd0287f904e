#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gbmc/calibration.hpp"
#include "gbmc/driver.hpp"
#include "gbmc/errors.hpp"
#include "gbmc/experiments.hpp"
#include "gbmc/heat_kernel.hpp"

namespace py = pybind11;

namespace {

// Results cross the boundary as JSON text; the Python side parses them.
std::string run_text(const std::string& text, const std::map<std::string, std::string>& overrides) {
  gbmc::RawConfig raw = gbmc::parse_key_values(text);
  for (const auto& [k, v] : overrides) raw[k] = v;
  const gbmc::RunConfig c = gbmc::build_config(raw);
  py::gil_scoped_release release;
  return gbmc::render_json(gbmc::execute(c).report);
}

std::string estimate_chi(const std::string& model, const gbmc::geometry::ModelParameters& params, double t,
                         long base_points, int bridges, std::uint64_t seed, int steps, int workers) {
  const auto m = gbmc::geometry::model_catalog(model, params);
  gbmc::EstimatorOptions o;
  o.steps = steps;
  o.workers = workers;
  py::gil_scoped_release release;
  return gbmc::render_json(gbmc::to_json(gbmc::estimate_chi(m, t, base_points, bridges, seed, o)));
}

py::dict model_info(const std::string& name, const gbmc::geometry::ModelParameters& params) {
  const auto m = gbmc::geometry::model_catalog(name, params);
  py::dict d;
  d["name"] = m.name();
  d["dimension"] = m.dimension();
  d["ambient_dimension"] = m.ambient_dimension();
  d["volume"] = m.volume();
  d["boundary_volume"] = m.has_boundary() ? m.boundary_volume() : 0.0;
  d["euler_characteristic"] = m.euler_characteristic();
  d["has_boundary"] = m.has_boundary();
  return d;
}

double heat_kernel(const std::string& name, const gbmc::geometry::ModelParameters& params, double t,
                   const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  return gbmc::heat::neumann_heat_kernel(gbmc::geometry::model_catalog(name, params), t, x, y).value;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Monte Carlo verification of Gauss-Bonnet for manifolds with boundary";

  py::register_exception<gbmc::ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<gbmc::NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def("version", &gbmc::artifact_version);
  m.def("models", &gbmc::geometry::catalog_names);
  m.def("experiments", &gbmc::experiment_names);
  m.def("model_info", &model_info, py::arg("name"), py::arg("params") = gbmc::geometry::ModelParameters{});
  m.def("neumann_heat_kernel", &heat_kernel, py::arg("name"), py::arg("params"), py::arg("t"), py::arg("x"),
        py::arg("y"));
  m.def("run_config", &run_text, py::arg("text"), py::arg("overrides") = std::map<std::string, std::string>{},
        "Runs a key = value config and returns the report as JSON text.");
  m.def("estimate_chi", &estimate_chi, py::arg("model"), py::arg("params"), py::arg("t"), py::arg("base_points"),
        py::arg("bridges"), py::arg("seed"), py::arg("steps") = 64, py::arg("workers") = 0);
  m.def("cancellation_suite", [](std::uint64_t seed, int instances) {
    return gbmc::render_json(gbmc::to_json(gbmc::cancellation_suite(seed, instances)));
  }, py::arg("seed"), py::arg("instances") = 100);
  m.def("calibrate", [](const std::vector<int>& dims) {
    return gbmc::render_json(gbmc::to_json(gbmc::calibrate_constants(dims)));
  }, py::arg("dimensions") = std::vector<int>{2, 3, 4});
  m.def("spectral_note", &gbmc::mckean_singer_note);
}
