// Python bindings: models, the QP solver and closed-loop scenario runs.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>

#include "thermpc/building.hpp"
#include "thermpc/errors.hpp"
#include "thermpc/log.hpp"
#include "thermpc/qp.hpp"
#include "thermpc/scenario.hpp"
#include "thermpc/statespace.hpp"

namespace py = pybind11;
using namespace thermpc;

namespace {

ControllerKind controller_kind(const std::string& name) {
  if (name == "mpc") return ControllerKind::Mpc;
  if (name == "baseline") return ControllerKind::Baseline;
  throw InputError("controller must be 'mpc' or 'baseline', got '" + name + "'");
}

py::dict streams_dict(const StreamStore& store) {
  py::dict out;
  for (const auto& s : store.streams()) {
    py::dict d;
    d["unit"] = s.unit;
    d["group"] = std::string(to_string(s.group));
    d["timestamps"] = s.timestamps;
    d["values"] = s.values;
    out[py::str(s.name)] = d;
  }
  return out;
}

py::object json_to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bilinear building models, an ADMM QP solver and MPC/baseline closed-loop simulation";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InputError>(m, "InputError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

  m.def("set_quiet", [](bool quiet) { log::set_level(quiet ? log::Level::Quiet : log::Level::Warning); },
        py::arg("quiet") = true);

  py::class_<DiscreteBilinearModel>(m, "Model")
      .def_property_readonly("n", &DiscreteBilinearModel::n)
      .def_property_readonly("n_u", &DiscreteBilinearModel::n_u)
      .def_property_readonly("n_v", &DiscreteBilinearModel::n_v)
      .def_readonly("ts", &DiscreteBilinearModel::ts)
      .def_readonly("substeps", &DiscreteBilinearModel::substeps)
      .def_readonly("A", &DiscreteBilinearModel::A)
      .def_readonly("Bu", &DiscreteBilinearModel::Bu)
      .def_readonly("Bv", &DiscreteBilinearModel::Bv)
      .def_readonly("d", &DiscreteBilinearModel::d)
      .def_property_readonly("states", [](const DiscreteBilinearModel& mm) { return mm.labels.states; })
      .def_property_readonly("inputs", [](const DiscreteBilinearModel& mm) { return mm.labels.inputs; })
      .def_property_readonly("disturbances", [](const DiscreteBilinearModel& mm) { return mm.labels.disturbances; })
      .def_property_readonly("zone_states", [](const DiscreteBilinearModel& mm) { return mm.labels.zone_states; })
      .def("is_linear", &DiscreteBilinearModel::is_linear)
      .def("spectral_radius", &DiscreteBilinearModel::spectral_radius)
      .def("step", [](const DiscreteBilinearModel& mm, const Vector& x, const Vector& u,
                      const Vector& v) { return step(mm, x, u, v); },
           py::arg("x"), py::arg("u"), py::arg("v"))
      .def("simulate", [](const DiscreteBilinearModel& mm, const Vector& x0, const Matrix& u,
                          const Matrix& v) { return simulate(mm, x0, u, v); },
           py::arg("x0"), py::arg("u_seq"), py::arg("v_seq"), "Rows are states 0..T.")
      .def("to_json", [](const DiscreteBilinearModel& mm) { return to_json(mm).dump(); });

  m.def("build_model", [](const std::string& path, double ts, int substeps) {
          return build_model(load_building(path), ts, substeps);
        },
        py::arg("building_path"), py::arg("ts") = 600.0, py::arg("substeps") = 10,
        "Load a building description and discretize it.");
  m.def("model_from_json", [](const std::string& text) { return model_from_json(nlohmann::json::parse(text)); },
        py::arg("text"));

  m.def("solve_qp",
        [](const Matrix& H, const Vector& g, const Vector& lb, const Vector& ub, const Matrix& G, const Vector& h,
           double tol, int max_iters) {
          QpProblem p{H, g, lb, ub, G, h};
          QpSettings s;
          s.tol = tol;
          s.max_iters = max_iters;
          const QpSolution r = solve_qp(p, s);
          py::dict out;
          out["z"] = r.z;
          out["y_box"] = r.y_box;
          out["y_rows"] = r.y_rows;
          out["status"] = std::string(to_string(r.status));
          out["objective"] = r.objective;
          out["iterations"] = r.iterations;
          out["residual"] = r.residual.max();
          return out;
        },
        py::arg("H"), py::arg("g"), py::arg("lb"), py::arg("ub"), py::arg("G"), py::arg("h"), py::arg("tol") = 1e-6,
        py::arg("max_iters") = 20000,
        "min 1/2 z'Hz + g'z  s.t.  lb <= z <= ub,  G z <= h");

  m.def("simulate_scenario",
        [](const std::string& path, const std::string& controller, py::object steps) {
          ScenarioConfig cfg = load_scenario(path);
          if (!steps.is_none()) cfg.duration_steps = steps.cast<std::size_t>();
          const std::string kind = controller.empty() ? std::string(to_string(cfg.controller)) : controller;
          SimulationResult r;
          {
            py::gil_scoped_release release;
            r = run_scenario(prepare_scenario(cfg), controller_kind(kind));
          }
          py::dict out;
          out["metrics"] = json_to_py(r.metrics.to_json());
          out["streams"] = streams_dict(r.streams);
          out["final_state"] = r.final_state;
          return out;
        },
        py::arg("scenario_path"), py::arg("controller") = "", py::arg("steps") = py::none(),
        "Run one controller in closed loop; controller defaults to the scenario's.");

  m.def("compare_scenario",
        [](const std::string& path, py::object steps) {
          ScenarioConfig cfg = load_scenario(path);
          if (!steps.is_none()) cfg.duration_steps = steps.cast<std::size_t>();
          Comparison c;
          {
            py::gil_scoped_release release;
            const PreparedScenario s = prepare_scenario(cfg);
            c.baseline = run_scenario(s, ControllerKind::Baseline).metrics;
            c.mpc = run_scenario(s, ControllerKind::Mpc).metrics;
          }
          return json_to_py(c.to_json(cfg.name));
        },
        py::arg("scenario_path"), py::arg("steps") = py::none());
}
