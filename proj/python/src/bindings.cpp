#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <string>
#include <vector>

#include "czpulse/errors.hpp"
#include "czpulse/experiments.hpp"
#include "czpulse/model.hpp"
#include "czpulse/optimize.hpp"
#include "czpulse/perturbation.hpp"
#include "czpulse/pulse.hpp"
#include "czpulse/spectrum.hpp"

namespace py = pybind11;
using namespace czpulse;

namespace {

// Model with a lazily built adiabatic table, shared across gate calls.
struct Session {
  explicit Session(const CircuitSpec& spec) : model(spec) {}
  CircuitModel model;
  std::shared_ptr<const AdiabaticTable> table;
  double table_idle = 0.0;

  const AdiabaticTable& table_at(double idle) {
    if (!table || table_idle != idle) {
      table = make_table(model, idle);
      table_idle = idle;
    }
    return *table;
  }
};

GateOptions gate_options(double dt_ns, std::optional<double> idle_ghz, std::optional<double> filter_mhz,
                         const std::string& kind) {
  GateOptions o;
  o.kind = pulse_kind_from_string(kind);
  o.dt_ns = dt_ns;
  o.idle_ghz = idle_ghz;
  o.filter_mhz = filter_mhz;
  return o;
}

py::dict report_dict(const GateResult& r) {
  py::dict d;
  d["lambdas"] = r.lambdas;
  d["epg"] = r.report.epg;
  d["phi_zz"] = r.report.phi_zz;
  d["phi1"] = r.report.phi1;
  d["phi2"] = r.report.phi2;
  d["leakage_total"] = r.report.leakage_total;
  d["unitarity_error"] = r.report.unitarity_error;
  std::vector<double> t(r.pulse.samples());
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = r.pulse.time_ns(k);
  d["t_ns"] = t;
  d["omega_c_ghz"] = r.pulse.omega_c_ghz;
  d["evals"] = r.evals;
  return d;
}

double resolve_idle(const Session& s, std::optional<double> idle) {
  if (idle) return *idle;
  if (s.model.spec().idle_ghz) return *s.model.spec().idle_ghz;
  throw ConfigError("no idle point given and the circuit defines none");
}

}  // namespace

PYBIND11_MODULE(_czpulse, m) {
  m.doc() = "Coupler-assisted adiabatic CZ gate toolkit";

  py::register_exception<Error>(m, "CzpulseError");

  py::class_<CircuitSpec>(m, "CircuitSpec")
      .def_property_readonly("mode_labels",
                             [](const CircuitSpec& s) {
                               std::vector<std::string> out;
                               for (const auto& mode : s.modes) out.push_back(mode.label);
                               return out;
                             })
      .def_property_readonly("idle_ghz", [](const CircuitSpec& s) { return s.idle_ghz; })
      .def("coupling_rho", &CircuitSpec::coupling_rho, py::arg("i"), py::arg("j"));

  m.def("reference_circuit", [] { return reference_circuit(); });
  m.def("gate_circuit", &gate_circuit);
  m.def("coupling_variant", [](double rho_qc, double rho_qq) { return coupling_variant(rho_qc, rho_qq); },
        py::arg("rho_qc"), py::arg("rho_qq"));

  m.def("effective_coupling_mhz", &effective_coupling, py::arg("spec"), py::arg("omega_c_ghz"));
  m.def("zeta2_direct_closed_form", &zeta2_direct_closed_form, py::arg("omega1"), py::arg("omega2"),
        py::arg("alpha1"), py::arg("alpha2"), py::arg("g12"));
  m.def("linspace", &linspace, py::arg("lo"), py::arg("hi"), py::arg("n"));

  m.def(
      "zz_curve",
      [](const CircuitSpec& spec, const std::vector<double>& grid) {
        const ZZCurve c = zz_curve(CircuitModel(spec), grid);
        py::dict d;
        d["omega_c_ghz"] = c.omega_c_ghz;
        d["zeta_mhz"] = c.zeta_mhz;
        d["g_eff_mhz"] = c.g_eff_mhz;
        d["d_factor"] = c.d_factor;
        return d;
      },
      py::arg("spec"), py::arg("grid_ghz"));

  m.def(
      "zz_switch",
      [](const CircuitSpec& spec, const std::vector<double>& grid) {
        const ZZSwitch s = zz_switch(spec, grid);
        return py::make_tuple(s.min_abs_khz, s.max_abs_mhz, s.on_off_ratio);
      },
      py::arg("spec"), py::arg("grid_ghz"));

  py::class_<Session>(m, "GateModel")
      .def(py::init<const CircuitSpec&>(), py::arg("spec"))
      .def(
          "evaluate",
          [](Session& s, double tg_ns, const std::vector<double>& lambdas, double dt_ns,
             std::optional<double> idle_ghz, std::optional<double> filter_mhz, const std::string& kind) {
            const double idle = resolve_idle(s, idle_ghz);
            const GateOptions o = gate_options(dt_ns, idle, filter_mhz, kind);
            return report_dict(evaluate_gate(s.model, s.table_at(idle), tg_ns, lambdas, o));
          },
          py::arg("tg_ns"), py::arg("lambdas"), py::arg("dt_ns") = 0.05, py::arg("idle_ghz") = py::none(),
          py::arg("filter_mhz") = py::none(), py::arg("kind") = "awp")
      .def(
          "optimize",
          [](Session& s, double tg_ns, int m_max, double dt_ns, std::optional<double> idle_ghz,
             std::optional<double> filter_mhz, const std::string& kind, int restarts, int max_evals) {
            const double idle = resolve_idle(s, idle_ghz);
            GateOptions o = gate_options(dt_ns, idle, filter_mhz, kind);
            o.m_max = m_max;
            o.optimizer.restarts = restarts;
            o.optimizer.max_evals = max_evals;
            s.table_at(idle);
            return report_dict(optimize_pulse(s.model, tg_ns, o, s.table));
          },
          py::arg("tg_ns"), py::arg("m_max") = 1, py::arg("dt_ns") = 0.05, py::arg("idle_ghz") = py::none(),
          py::arg("filter_mhz") = py::none(), py::arg("kind") = "awp", py::arg("restarts") = 3,
          py::arg("max_evals") = 200);
}
