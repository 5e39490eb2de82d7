#include "bastion/cli.hpp"

#include <nlohmann/json.hpp>
#include <ostream>

#include "bastion/artifacts.hpp"
#include "bastion/config.hpp"

namespace bastion {

using ordered_json = nlohmann::ordered_json;

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err) {
  ScenarioConfig cfg;
  try {
    cfg = parse_config(opts.config);
    if (opts.dt.has_value()) cfg.dt = *opts.dt;
    if (opts.duration.has_value()) cfg.duration = *opts.duration;
    if (opts.dt.has_value() || opts.duration.has_value()) {
      // Revalidate with the overrides folded into the resolved config.
      cfg = parse_config_text(serialize_config(cfg));
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  RunResult res;
  try {
    res = run_scenario(cfg);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  const std::string out_dir = opts.out_dir.empty() ? "runs/" + cfg.name : opts.out_dir;
  WrittenArtifacts w;
  try {
    w = write_run_artifacts(res, opts.config, out_dir);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  out << "scenario:        " << cfg.name << "\n";
  out << "status:          "
      << (res.status == RunStatus::Ok
              ? "ok"
              : (res.status == RunStatus::SafetyViolation ? "safety-violation" : "blowup"))
      << "\n";
  if (res.status != RunStatus::Ok)
    out << "error:           " << res.error_kind << " at t=" << res.error_t << " ("
        << res.error_detail << ")\n";
  out << "rows:            " << res.rows.size() << "\n";
  out << "min_h:           " << res.metrics.min_h << " at t=" << res.metrics.argmin_t << "\n";
  out << "theta_err_final: " << res.metrics.theta_err_final << "\n";
  out << "J_total:         " << res.metrics.J_total << "\n";
  out << "sigmin_grid_inf: " << res.sigmin_grid_inf << "\n";
  out << "config_hash:     " << w.config_hash << "\n";
  out << "artifacts:       " << w.dir.string() << "\n";

  switch (res.status) {
    case RunStatus::Ok:
      return 0;
    case RunStatus::SafetyViolation:
      return 2;
    case RunStatus::Blowup:
      return 3;
  }
  return 1;
}

int cmd_compare(const std::string& dir_a, const std::string& dir_b, std::ostream& out,
                std::ostream& err) {
  try {
    const CompareReport rep = compare_runs(dir_a, dir_b);
    out << rep.table << "\n" << rep.json;
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_check(const std::string& csv_path, std::ostream& out, std::ostream& err) {
  const CsvCheck chk = check_csv(csv_path);
  if (!chk.ok) {
    err << "invalid: " << chk.message << "\n";
    return 1;
  }
  out << "ok: " << chk.rows << " rows\n";
  return 0;
}

int cmd_oracle(const std::string& config, std::ostream& out, std::ostream& err) {
  LqrOracleReport rep;
  try {
    const ScenarioConfig cfg = parse_config(config.empty() ? "oracle_lqr" : config);
    rep = run_lqr_oracle(cfg);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  ordered_json j{{"a", rep.a},
                 {"b", rep.b},
                 {"q", rep.q},
                 {"r", rep.r},
                 {"P_star", rep.P_star},
                 {"Wc_final", rep.Wc_final},
                 {"Wa_final", rep.Wa_final},
                 {"err_Wc", rep.err_Wc},
                 {"err_Wa", rep.err_Wa},
                 {"within_2pct", rep.within_2pct}};
  out << j.dump(2) << "\n";
  return rep.within_2pct ? 0 : 1;
}

}  // namespace bastion
