#include "bastion/artifacts.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>

namespace bastion {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double at_or_zero(const Vec& v, int i) { return i < v.size() ? v[i] : 0.0; }

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error("short write to '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string status_name(RunStatus s) {
  switch (s) {
    case RunStatus::Ok:
      return "ok";
    case RunStatus::SafetyViolation:
      return "safety-violation";
    case RunStatus::Blowup:
      return "blowup";
  }
  return "unknown";
}

ordered_json vec_json(const Vec& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

std::string csv_header() {
  return "t,x1,x2,z,zhat,th1,th2,th3,th4,theta_err,"
         "wc1,wc2,wc3,wc4,wc5,wc6,wa1,wa2,wa3,wa4,wa5,wa6,"
         "u,delta,h,sigmin_stack,sigmin_grid,J";
}

std::string format_csv(const RunResult& res) {
  std::string out = csv_header() + "\n";
  out.reserve(out.size() + res.rows.size() * 420);
  for (const LogRow& r : res.rows) {
    out += fmt(r.t);
    out += ',';
    out += fmt(at_or_zero(r.x, 0));
    out += ',';
    out += fmt(at_or_zero(r.x, 1));
    out += ',';
    out += fmt(r.z);
    out += ',';
    out += fmt(r.zhat);
    for (int i = 0; i < 4; ++i) {
      out += ',';
      out += fmt(at_or_zero(r.theta_hat, i));
    }
    out += ',';
    out += fmt(r.theta_err);
    for (int i = 0; i < 6; ++i) {
      out += ',';
      out += fmt(at_or_zero(r.Wc, i));
    }
    for (int i = 0; i < 6; ++i) {
      out += ',';
      out += fmt(at_or_zero(r.Wa, i));
    }
    out += ',';
    out += fmt(at_or_zero(r.u, 0));
    out += ',';
    out += fmt(r.delta);
    out += ',';
    out += fmt(r.h);
    out += ',';
    out += fmt(r.sigmin_stack);
    out += ',';
    out += fmt(r.sigmin_grid);
    out += ',';
    out += fmt(r.J);
    out += '\n';
  }
  return out;
}

CsvCheck check_csv(const std::filesystem::path& path) {
  CsvCheck chk;
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    chk.message = "cannot read '" + path.string() + "'";
    return chk;
  }
  std::string line;
  if (!std::getline(in, line)) {
    chk.message = "empty file";
    return chk;
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != csv_header()) {
    chk.message = "header mismatch";
    return chk;
  }
  const int ncols = 28;
  double prev_t = -std::numeric_limits<double>::infinity();
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.eof()) break;
    int col = 0;
    size_t pos = 0;
    double t_val = 0.0;
    while (pos <= line.size()) {
      size_t comma = line.find(',', pos);
      const std::string field =
          line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      char* end = nullptr;
      const double v = std::strtod(field.c_str(), &end);
      if (field.empty() || end == nullptr || *end != '\0' || !std::isfinite(v)) {
        chk.message = "line " + std::to_string(lineno) + ", column " +
                      std::to_string(col + 1) + ": not a finite number";
        return chk;
      }
      if (col == 0) t_val = v;
      ++col;
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (col != ncols) {
      chk.message = "line " + std::to_string(lineno) + ": expected " +
                    std::to_string(ncols) + " columns, got " + std::to_string(col);
      return chk;
    }
    if (!(t_val > prev_t)) {
      chk.message = "line " + std::to_string(lineno) + ": time is not strictly increasing";
      return chk;
    }
    prev_t = t_val;
    ++chk.rows;
  }
  if (chk.rows == 0) {
    chk.message = "no data rows";
    return chk;
  }
  chk.ok = true;
  chk.message = "ok";
  return chk;
}

std::string summary_json(const RunResult& res, const RunManifest& manifest) {
  const ScenarioConfig& cfg = res.config;
  ordered_json j;
  j["manifest"] = ordered_json{{"scenario", manifest.scenario},
                               {"config_source", manifest.config_source},
                               {"out_dir", manifest.out_dir},
                               {"config_hash", manifest.config_hash},
                               {"created_utc", manifest.created_utc}};
  j["status"] = status_name(res.status);
  if (res.status == RunStatus::Ok)
    j["error"] = nullptr;
  else
    j["error"] = ordered_json{
        {"kind", res.error_kind}, {"detail", res.error_detail}, {"t", res.error_t}};

  const double within = res.metrics.ultimate_bound_last10;
  j["metrics"] = ordered_json{{"min_h", res.metrics.min_h},
                              {"argmin_t", res.metrics.argmin_t},
                              {"theta_err_final", res.metrics.theta_err_final},
                              {"J_total", res.metrics.J_total},
                              {"ultimate_bound_last10", within},
                              {"chi_ultimate", cfg.chi_ultimate},
                              {"within_chi", within <= cfg.chi_ultimate}};
  j["sigmin_grid_inf"] = res.sigmin_grid_inf;
  j["theorem2_diagnostic"] = ordered_json{{"applicable", res.theorem2.applicable},
                                          {"lhs", res.theorem2.lhs},
                                          {"sigma_theta", res.theorem2.sigma_theta},
                                          {"holds", res.theorem2.holds}};
  j["omega_over_rho"] =
      ordered_json{{"max", res.omega_over_rho_max},
                   {"bound", 1.0 / (2.0 * std::sqrt(cfg.adp.nu))}};
  j["gamma_eig_observed"] =
      ordered_json{{"min", res.gamma_eig_min}, {"max", res.gamma_eig_max}};
  j["upsilon_eig_observed"] =
      ordered_json{{"min", res.upsilon_eig_min}, {"max", res.upsilon_eig_max}};

  ordered_json admissions = ordered_json::array();
  for (const AdmissionEvent& e : res.admissions)
    admissions.push_back(ordered_json{{"t", e.t},
                                      {"slot", e.slot},
                                      {"min_eig_before", e.min_eig_before},
                                      {"min_eig_after", e.min_eig_after}});
  ordered_json entries = ordered_json::array();
  for (const HistoryEntry& e : res.final_entries) {
    const double residual = (e.X - e.Y * cfg.theta_true - e.Gfu).norm();
    entries.push_back(
        ordered_json{{"t", e.t}, {"sigma", e.sigma}, {"model_residual", residual}});
  }
  j["stack"] = ordered_json{{"capacity", cfg.estimator.stack_capacity},
                            {"size", static_cast<int>(res.final_entries.size())},
                            {"min_eig", res.stack_min_eig_final},
                            {"full_at_t", res.stack_full_time},
                            {"admissions", admissions},
                            {"entries", entries}};

  ordered_json weights;
  if (!res.rows.empty()) {
    const LogRow& last = res.rows.back();
    weights = ordered_json{{"theta_hat", vec_json(last.theta_hat)},
                           {"Wc", vec_json(last.Wc)},
                           {"Wa", vec_json(last.Wa)}};
  } else {
    weights = ordered_json{{"theta_hat", vec_json(cfg.estimator.theta_hat0)},
                           {"Wc", vec_json(cfg.adp.Wc0)},
                           {"Wa", vec_json(cfg.adp.Wa0)}};
  }
  j["weights_final"] = weights;

  ordered_json inc = ordered_json::array();
  for (const auto& [t0, t1] : res.incursions) inc.push_back(ordered_json::array({t0, t1}));
  j["incursions"] = inc;
  j["safety_violations"] = res.violation_count;
  j["rows"] = static_cast<long>(res.rows.size());
  j["dt"] = cfg.dt;
  j["duration"] = cfg.duration;
  return j.dump(2) + "\n";
}

WrittenArtifacts write_run_artifacts(const RunResult& res, const std::string& config_source,
                                     const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::string config_text = serialize_config(res.config);
  WrittenArtifacts w;
  w.dir = out_dir;
  w.config_hash = git_blob_hash(config_text);
  w.config_file = out_dir / "resolved-config.json";
  w.trajectory_file = out_dir / "trajectory.csv";
  w.summary_file = out_dir / "summary.json";

  RunManifest manifest;
  manifest.scenario = res.config.name;
  manifest.config_source = config_source;
  manifest.out_dir = out_dir.string();
  manifest.config_hash = w.config_hash;
  std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  manifest.created_utc = stamp;

  write_text(w.config_file, config_text);
  write_text(w.trajectory_file, format_csv(res));
  write_text(w.summary_file, summary_json(res, manifest));
  return w;
}

namespace {

struct RunDigest {
  std::string dir;
  std::string scenario;
  std::string status;
  double min_h = 0.0;
  double argmin_t = 0.0;
  double theta_err_final = 0.0;
  double J_total = 0.0;
  double sigmin_grid_inf = 0.0;
  long incursions = 0;
  long violations = 0;
};

RunDigest load_digest(const std::filesystem::path& dir) {
  const auto summary_path = dir / "summary.json";
  ordered_json j;
  try {
    j = ordered_json::parse(read_text(summary_path));
  } catch (const std::exception& e) {
    throw Error("cannot parse '" + summary_path.string() + "': " + e.what());
  }
  RunDigest d;
  d.dir = dir.string();
  try {
    d.scenario = j.at("manifest").at("scenario").get<std::string>();
    d.status = j.at("status").get<std::string>();
    const auto& m = j.at("metrics");
    d.min_h = m.at("min_h").get<double>();
    d.argmin_t = m.at("argmin_t").get<double>();
    d.theta_err_final = m.at("theta_err_final").get<double>();
    d.J_total = m.at("J_total").get<double>();
    d.sigmin_grid_inf = j.at("sigmin_grid_inf").get<double>();
    d.incursions = static_cast<long>(j.at("incursions").size());
    d.violations = j.at("safety_violations").get<long>();
  } catch (const std::exception& e) {
    throw Error("'" + summary_path.string() + "' is missing summary fields: " + e.what());
  }
  return d;
}

std::string pad(const std::string& s, size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string num6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

CompareReport compare_runs(const std::filesystem::path& dir_a,
                           const std::filesystem::path& dir_b) {
  const RunDigest a = load_digest(dir_a);
  const RunDigest b = load_digest(dir_b);

  const bool a_clean = a.status == "ok" && a.violations == 0 && a.min_h > 0.0;
  const bool b_clean = b.status == "ok" && b.violations == 0 && b.min_h > 0.0;
  std::string safer = "tie";
  if (a.min_h > b.min_h)
    safer = "a";
  else if (b.min_h > a.min_h)
    safer = "b";

  const size_t wm = 18, wc = 16;
  std::ostringstream t;
  t << pad("metric", wm) << pad("A: " + a.scenario, wc + 3) << pad("B: " + b.scenario, wc + 3)
    << "delta (B-A)\n";
  t << std::string(wm + 2 * (wc + 3) + 11, '-') << "\n";
  auto row = [&](const std::string& name, double va, double vb) {
    t << pad(name, wm) << pad(num6(va), wc + 3) << pad(num6(vb), wc + 3) << num6(vb - va)
      << "\n";
  };
  t << pad("status", wm) << pad(a.status, wc + 3) << pad(b.status, wc + 3) << "-\n";
  row("min_h", a.min_h, b.min_h);
  row("argmin_t", a.argmin_t, b.argmin_t);
  row("theta_err_final", a.theta_err_final, b.theta_err_final);
  row("J_total", a.J_total, b.J_total);
  row("sigmin_grid_inf", a.sigmin_grid_inf, b.sigmin_grid_inf);
  row("incursions", static_cast<double>(a.incursions), static_cast<double>(b.incursions));
  row("violations", static_cast<double>(a.violations), static_cast<double>(b.violations));
  t << "\nsafer run: " << (safer == "tie" ? "tie" : (safer == "a" ? a.scenario : b.scenario))
    << " (larger minimum constraint margin)\n";

  auto digest_json = [](const RunDigest& d) {
    return ordered_json{{"dir", d.dir},
                        {"scenario", d.scenario},
                        {"status", d.status},
                        {"min_h", d.min_h},
                        {"argmin_t", d.argmin_t},
                        {"theta_err_final", d.theta_err_final},
                        {"J_total", d.J_total},
                        {"sigmin_grid_inf", d.sigmin_grid_inf},
                        {"incursions", d.incursions},
                        {"violations", d.violations}};
  };
  ordered_json j;
  j["a"] = digest_json(a);
  j["b"] = digest_json(b);
  j["delta"] = ordered_json{{"min_h", b.min_h - a.min_h},
                            {"theta_err_final", b.theta_err_final - a.theta_err_final},
                            {"J_total", b.J_total - a.J_total}};
  j["verdict"] = ordered_json{{"safer", safer},
                              {"a_clean", a_clean},
                              {"b_clean", b_clean},
                              {"margin_gap", std::abs(a.min_h - b.min_h)}};

  CompareReport rep;
  rep.table = t.str();
  rep.json = j.dump(2) + "\n";
  return rep;
}

}  // namespace bastion
