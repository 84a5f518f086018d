#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cornerflow/commands.hpp"
#include "cornerflow/gas.hpp"

namespace py = pybind11;
using namespace cornerflow;

namespace {

py::dict field_dict(const FieldFile& f) {
  static const char* names[] = {"ell", "lam", "x", "y", "psi", "vx", "vy", "rho", "mach"};
  Eigen::MatrixXd rows(f.rows.size(), 9);
  for (std::size_t i = 0; i < f.rows.size(); ++i) {
    for (int c = 0; c < 9; ++c) rows(i, c) = f.rows[i][c];
  }
  py::dict d;
  for (int c = 0; c < 9; ++c) d[names[c]] = Eigen::VectorXd(rows.col(c));
  d["n_ell"] = f.mesh.n_ell;
  d["n_lam"] = f.mesh.n_lam;
  d["text"] = format_field(f);
  return d;
}

py::dict run(const std::string& config_text) {
  const ExperimentConfig cfg = parse_config(config_text);
  CaseOutcome out;
  {
    py::gil_scoped_release release;
    out = run_case(cfg);
  }
  py::dict d;
  d["exit_code"] = out.exit_code;
  d["status"] = out.status;
  py::dict report;
  for (const auto& [k, v] : out.report) report[py::str(k)] = v;
  d["report"] = report;
  d["max_mach"] = out.max_mach;
  d["field"] = out.field ? py::object(field_dict(*out.field)) : py::none();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Subsonic corner flow solver";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<GasModel>(m, "GasModel")
      .def(py::init<double, double>(), py::arg("gamma") = 1.4, py::arg("mach_cap") = 0.8)
      .def_property_readonly("q_sonic", &GasModel::q_sonic)
      .def_property_readonly("q_bar", &GasModel::q_bar)
      .def_property_readonly("sonic_density", &GasModel::sonic_density)
      .def("h", &GasModel::h)
      .def("h_prime", &GasModel::h_prime)
      .def("h_cutoff", &GasModel::h_cutoff)
      .def("energy_density", &GasModel::h_integral)
      .def("mach_from_momentum", &GasModel::mach_from_momentum)
      .def("density_from_speed", &GasModel::density_from_speed);

  m.def("parse_number", &parse_number);
  m.def("normalize_config", [](const std::string& text) { return serialize_config(parse_config(text)); },
        "Parses, validates and re-serializes a configuration.");
  m.def("run", &run, py::arg("config_text"),
        "Solves one configuration; returns status, report entries and nodal field columns.");
  m.def(
      "reference",
      [](const std::string& kind, double ell_min, double ell_max, int n_ell, int n_lam) {
        ReferenceOptions opt;
        opt.kind = kind;
        opt.ell_min = ell_min;
        opt.ell_max = ell_max;
        opt.n_ell = n_ell;
        opt.n_lam = n_lam;
        return field_dict(reference_field(opt));
      },
      py::arg("kind") = "example", py::arg("ell_min") = std::log(2.0), py::arg("ell_max") = 4.0,
      py::arg("n_ell") = 64, py::arg("n_lam") = 64);
}
