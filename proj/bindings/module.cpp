// Python bindings for the main operations: config handling, scenario runs,
// artifact writing, run comparison, the LQR oracle, and barrier math.
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "bastion/artifacts.hpp"
#include "bastion/config.hpp"

namespace py = pybind11;
using namespace bastion;

namespace {

double col_at(const Vec& v, int i) { return i < v.size() ? v[i] : 0.0; }

Mat trajectory_matrix(const RunResult& res) {
  const int ncols = 28;
  Mat M(static_cast<Eigen::Index>(res.rows.size()), ncols);
  for (size_t r = 0; r < res.rows.size(); ++r) {
    const LogRow& row = res.rows[r];
    int c = 0;
    M(r, c++) = row.t;
    M(r, c++) = col_at(row.x, 0);
    M(r, c++) = col_at(row.x, 1);
    M(r, c++) = row.z;
    M(r, c++) = row.zhat;
    for (int i = 0; i < 4; ++i) M(r, c++) = col_at(row.theta_hat, i);
    M(r, c++) = row.theta_err;
    for (int i = 0; i < 6; ++i) M(r, c++) = col_at(row.Wc, i);
    for (int i = 0; i < 6; ++i) M(r, c++) = col_at(row.Wa, i);
    M(r, c++) = col_at(row.u, 0);
    M(r, c++) = row.delta;
    M(r, c++) = row.h;
    M(r, c++) = row.sigmin_stack;
    M(r, c++) = row.sigmin_grid;
    M(r, c++) = row.J;
  }
  return M;
}

std::vector<std::string> columns() {
  std::vector<std::string> cols;
  std::string header = csv_header();
  size_t pos = 0;
  while (pos <= header.size()) {
    size_t comma = header.find(',', pos);
    cols.push_back(header.substr(pos, comma == std::string::npos ? std::string::npos
                                                                 : comma - pos));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return cols;
}

py::dict result_dict(const RunResult& res) {
  py::dict d;
  d["status"] = res.status == RunStatus::Ok
                    ? "ok"
                    : (res.status == RunStatus::SafetyViolation ? "safety-violation"
                                                                : "blowup");
  py::dict metrics;
  metrics["min_h"] = res.metrics.min_h;
  metrics["argmin_t"] = res.metrics.argmin_t;
  metrics["theta_err_final"] = res.metrics.theta_err_final;
  metrics["J_total"] = res.metrics.J_total;
  metrics["ultimate_bound_last10"] = res.metrics.ultimate_bound_last10;
  d["metrics"] = metrics;
  d["sigmin_grid_inf"] = res.sigmin_grid_inf;
  d["omega_over_rho_max"] = res.omega_over_rho_max;
  d["stack_full_time"] = res.stack_full_time;
  d["stack_min_eig_final"] = res.stack_min_eig_final;
  d["violations"] = res.violation_count;
  py::list inc;
  for (const auto& [t0, t1] : res.incursions) inc.append(py::make_tuple(t0, t1));
  d["incursions"] = inc;
  d["columns"] = columns();
  d["trajectory"] = trajectory_matrix(res);
  RunManifest man;
  man.scenario = res.config.name;
  man.config_source = "<memory>";
  man.out_dir = "";
  man.config_hash = git_blob_hash(serialize_config(res.config));
  man.created_utc = "";
  d["summary_json"] = summary_json(res, man);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Safe adaptive optimal control with barrier states: core operations";

  // Translators run newest-first, so the base class must be registered
  // before the derived one or it would shadow it.
  py::register_exception<Error>(m, "SimulationError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigurationError", PyExc_ValueError);

  py::class_<ScenarioConfig>(m, "Config")
      .def_static("from_json", &parse_config_text, py::arg("text"),
                  "Parse and validate a config from a JSON string.")
      .def_static("load", &parse_config, py::arg("path_or_preset"),
                  "Load a config file or a bundled preset by name.")
      .def("to_json", &serialize_config, "Canonical resolved-config JSON.")
      .def("hash",
           [](const ScenarioConfig& c) { return git_blob_hash(serialize_config(c)); })
      .def_property_readonly("name", [](const ScenarioConfig& c) { return c.name; })
      .def_property_readonly("dt", [](const ScenarioConfig& c) { return c.dt; })
      .def_property_readonly("duration",
                             [](const ScenarioConfig& c) { return c.duration; })
      .def_property_readonly(
          "mode",
          [](const ScenarioConfig& c) {
            return c.mode == Mode::BasRl ? "bas-rl" : "no-safety";
          })
      .def("__repr__", [](const ScenarioConfig& c) {
        return "<Config '" + c.name + "'>";
      });

  m.def("preset_names", &preset_names, "Names of the bundled scenario presets.");
  m.def("preset_text", &preset_text, py::arg("name"), "JSON text of a bundled preset.");
  m.def("git_blob_hash", &git_blob_hash, py::arg("content"));

  m.def("run", [](const ScenarioConfig& cfg) { return result_dict(run_scenario(cfg)); },
        py::arg("config"),
        "Simulate a scenario; returns status, metrics, and the trajectory matrix.");

  m.def(
      "write_run",
      [](const ScenarioConfig& cfg, const std::string& out_dir,
         const std::string& config_source) {
        const RunResult res = run_scenario(cfg);
        const WrittenArtifacts w = write_run_artifacts(res, config_source, out_dir);
        py::dict d = result_dict(res);
        d["dir"] = w.dir.string();
        d["config_hash"] = w.config_hash;
        return d;
      },
      py::arg("config"), py::arg("out_dir"), py::arg("config_source") = "<python>",
      "Simulate and write resolved-config.json, trajectory.csv, summary.json.");

  m.def(
      "compare_dirs",
      [](const std::string& a, const std::string& b) {
        const CompareReport rep = compare_runs(a, b);
        py::dict d;
        d["table"] = rep.table;
        d["json"] = rep.json;
        return d;
      },
      py::arg("dir_a"), py::arg("dir_b"), "Compare two run directories' summaries.");

  m.def(
      "check_csv",
      [](const std::string& path) {
        const CsvCheck chk = check_csv(path);
        py::dict d;
        d["ok"] = chk.ok;
        d["rows"] = chk.rows;
        d["message"] = chk.message;
        return d;
      },
      py::arg("path"), "Validate a trajectory.csv file.");

  m.def(
      "lqr_oracle",
      [](const ScenarioConfig& cfg) {
        const LqrOracleReport rep = run_lqr_oracle(cfg);
        py::dict d;
        d["a"] = rep.a;
        d["b"] = rep.b;
        d["q"] = rep.q;
        d["r"] = rep.r;
        d["P_star"] = rep.P_star;
        d["Wc_final"] = rep.Wc_final;
        d["Wa_final"] = rep.Wa_final;
        d["err_Wc"] = rep.err_Wc;
        d["err_Wa"] = rep.err_Wa;
        d["within_2pct"] = rep.within_2pct;
        return d;
      },
      py::arg("config"), "Learn on the scalar plant and compare to the Riccati value.");
  m.def("scalar_are_solution", &scalar_are_solution, py::arg("a"), py::arg("b"),
        py::arg("q"), py::arg("r"));

  py::class_<BarrierSpec>(m, "Barrier")
      .def(py::init([](const Vec& center, double radius, double K) {
             return make_circle_barrier(center, radius, K);
           }),
           py::arg("center"), py::arg("radius"), py::arg("K"))
      .def("h", [](const BarrierSpec& b, const Vec& x) { return b.h(x); }, py::arg("x"))
      .def("beta", [](const BarrierSpec& b, const Vec& x) { return eval_beta(b, x); },
           py::arg("x"))
      .def("phi", [](const BarrierSpec& b, double beta) { return eval_phi(b, beta); },
           py::arg("beta"))
      .def("state", [](const BarrierSpec& b, const Vec& x) { return augment(b, x).z; },
           py::arg("x"), "Shifted barrier state z = beta(x) - beta0.")
      .def(
          "is_safe",
          [](const BarrierSpec& b, const Vec& x) {
            const SafetyCheck c = is_safe(b, x);
            return py::make_tuple(c.safe, c.margin);
          },
          py::arg("x"))
      .def_property_readonly("beta0", [](const BarrierSpec& b) { return b.beta0; })
      .def_property_readonly("K", [](const BarrierSpec& b) { return b.K; });

  m.def(
      "benchmark_plant_deriv",
      [](const Vec& theta, const Vec& x, const Vec& u) {
        const PlantModel plant = make_benchmark_plant(theta, theta.norm() + 1.0);
        return plant_deriv(plant, x, u);
      },
      py::arg("theta"), py::arg("x"), py::arg("u"),
      "xdot of the two-state benchmark plant under parameters theta.");

  m.def("sym_min_eig", &sym_min_eig, py::arg("M"),
        "Smallest eigenvalue of a symmetric matrix (cyclic Jacobi).");
}
