#include "bastion/config.hpp"

#include <openssl/evp.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace bastion {

using ordered_json = nlohmann::ordered_json;

namespace {

void check_keys(const ordered_json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw ConfigError(path.empty() ? it.key() : path + "." + it.key(), "unknown key");
  }
}

std::string join(const std::string& path, const char* key) {
  return path.empty() ? key : path + "." + key;
}

double as_num(const ordered_json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  return j.get<double>();
}

double num_or(const ordered_json& j, const char* key, double def, const std::string& path) {
  if (!j.contains(key)) return def;
  return as_num(j.at(key), join(path, key));
}

int int_or(const ordered_json& j, const char* key, int def, const std::string& path) {
  if (!j.contains(key)) return def;
  const auto& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(join(path, key), "expected an integer");
  return v.get<int>();
}

unsigned long long uint_or(const ordered_json& j, const char* key, unsigned long long def,
                           const std::string& path) {
  if (!j.contains(key)) return def;
  const auto& v = j.at(key);
  if (!(v.is_number_integer() && v.get<long long>() >= 0))
    throw ConfigError(join(path, key), "expected a non-negative integer");
  return v.get<unsigned long long>();
}

std::string str_required(const ordered_json& j, const char* key, const std::string& path) {
  if (!j.contains(key)) throw ConfigError(join(path, key), "required");
  if (!j.at(key).is_string()) throw ConfigError(join(path, key), "expected a string");
  return j.at(key).get<std::string>();
}

Vec parse_vec(const ordered_json& j, int dim, const std::string& path) {
  if (j.is_number()) return Vec::Constant(dim, j.get<double>());
  if (!j.is_array()) throw ConfigError(path, "expected a number or an array");
  if (static_cast<int>(j.size()) != dim)
    throw ConfigError(path, "expected " + std::to_string(dim) + " entries, got " +
                                std::to_string(j.size()));
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = as_num(j.at(static_cast<size_t>(i)), path);
  return v;
}

// Scalar -> c*I, flat array -> diagonal, nested arrays -> full matrix.
Mat parse_mat(const ordered_json& j, int dim, const std::string& path) {
  if (j.is_number()) return j.get<double>() * Mat::Identity(dim, dim);
  if (!j.is_array()) throw ConfigError(path, "expected a number or an array");
  if (static_cast<int>(j.size()) != dim)
    throw ConfigError(path, "expected " + std::to_string(dim) + " rows/entries");
  if (j.at(0).is_number()) {
    Mat M = Mat::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) M(i, i) = as_num(j.at(static_cast<size_t>(i)), path);
    return M;
  }
  Mat M(dim, dim);
  for (int r = 0; r < dim; ++r) {
    const auto& row = j.at(static_cast<size_t>(r));
    if (!row.is_array() || static_cast<int>(row.size()) != dim)
      throw ConfigError(path, "expected a " + std::to_string(dim) + "x" +
                                  std::to_string(dim) + " matrix");
    for (int c = 0; c < dim; ++c) M(r, c) = as_num(row.at(static_cast<size_t>(c)), path);
  }
  return M;
}

void require_spd(const Mat& M, const std::string& path) {
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-9)
    throw ConfigError(path, "must be symmetric");
  Eigen::LLT<Mat> llt(0.5 * (M + M.transpose()));
  if (llt.info() != Eigen::Success) throw ConfigError(path, "must be positive definite");
}

void validate(const ScenarioConfig& cfg, int n, int p, int L, int ns) {
  if (!(cfg.theta_bound > 0.0)) throw ConfigError("model.theta_bound", "must be positive");
  if (cfg.theta_true.norm() > cfg.theta_bound)
    throw ConfigError("model.theta_true", "|theta_true| exceeds theta_bound");
  if (!(cfg.dt > 0.0)) throw ConfigError("dt", "must be positive");
  if (!(cfg.duration >= cfg.estimator.window))
    throw ConfigError("duration", "must cover the estimator window");
  if (!(cfg.estimator.window >= cfg.dt))
    throw ConfigError("estimator.window", "must be at least one step");
  if (!(cfg.estimator.capture_period > 0.0))
    throw ConfigError("estimator.capture_period", "must be positive");
  if (cfg.log_decimation < 1) throw ConfigError("log_decimation", "must be >= 1");
  if (!(cfg.chi_ultimate > 0.0)) throw ConfigError("chi_ultimate", "must be positive");
  if (!(cfg.estimator.kappa > 0.0)) throw ConfigError("estimator.kappa", "must be positive");
  if (cfg.estimator.k_theta < 0.0 || cfg.estimator.beta_theta < 0.0)
    throw ConfigError("estimator", "gains must be non-negative");
  if (cfg.estimator.stack_capacity < 1)
    throw ConfigError("estimator.stack_capacity", "must be >= 1");
  if (!(cfg.estimator.delta_admission > 0.0))
    throw ConfigError("estimator.delta_admission", "must be positive");
  if (!(cfg.adp.nu > 0.0)) throw ConfigError("adp.nu", "must be positive");
  if (cfg.adp.k_c1 < 0 || cfg.adp.k_c2 < 0 || cfg.adp.k_a1 < 0 || cfg.adp.k_a2 < 0 ||
      cfg.adp.beta_c < 0)
    throw ConfigError("adp", "gains must be non-negative");
  if (!(cfg.adp.upsilon_floor > 0.0)) throw ConfigError("adp.upsilon_floor", "must be positive");
  if (!(cfg.adp.upsilon_ceiling > cfg.adp.upsilon_floor))
    throw ConfigError("adp.upsilon_ceiling", "must exceed the floor");

  require_spd(cfg.Q, "cost.Q");
  require_spd(cfg.R, "cost.R");
  require_spd(cfg.estimator.Gamma0, "estimator.gamma0");
  require_spd(cfg.adp.Upsilon0, "adp.upsilon0");
  if (cfg.estimator.theta_hat0.norm() > cfg.theta_bound)
    throw ConfigError("estimator.theta_hat0", "initial estimate outside the theta ball");

  if (cfg.mode == Mode::BasRl) {
    if (!(cfg.observer.gamma > 0.0)) throw ConfigError("observer.gamma", "must be positive");
    if (!(cfg.barrier_K > 0.0)) throw ConfigError("barrier.K", "must be positive");
    if (!cfg.constraint.has_value()) throw ConfigError("constraint", "required in bas-rl mode");
  }
  if (cfg.constraint.has_value()) {
    if (cfg.constraint->center.size() != n)
      throw ConfigError("constraint.center", "must match the plant dimension");
    if (!(cfg.constraint->radius > 0.0))
      throw ConfigError("constraint.radius", "must be positive");
  }
  if (cfg.mode == Mode::BasRl) {
    BarrierSpec barrier;
    try {
      barrier = make_circle_barrier(cfg.constraint->center, cfg.constraint->radius,
                                    cfg.barrier_K);
    } catch (const Error& e) {
      throw ConfigError("constraint", e.what());
    }
    const double h0 = barrier.h(cfg.x0);
    if (!(h0 > 0.0))
      throw ConfigError("x0", "must be strictly safe in bas-rl mode (h(x0) = " +
                                  std::to_string(h0) + ")");
  }

  // Everything context construction checks on top (basis/grid/dims).
  try {
    make_context(cfg);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("config", e.what());
  }
  (void)p;
  (void)L;
  (void)ns;
}

}  // namespace

ScenarioConfig parse_config_text(const std::string& json_text) {
  ordered_json root;
  try {
    root = ordered_json::parse(json_text);
  } catch (const std::exception& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  check_keys(root, "",
             {"name", "mode", "model", "constraint", "barrier", "x0", "duration", "dt",
              "log_decimation", "chi_ultimate", "observer", "estimator", "adp", "cost"});

  ScenarioConfig cfg;
  cfg.name = root.contains("name") ? str_required(root, "name", "") : "scenario";

  const std::string mode = str_required(root, "mode", "");
  if (mode == "bas-rl")
    cfg.mode = Mode::BasRl;
  else if (mode == "no-safety")
    cfg.mode = Mode::NoSafety;
  else
    throw ConfigError("mode", "must be 'bas-rl' or 'no-safety'");

  if (!root.contains("model")) throw ConfigError("model", "required");
  const auto& jmodel = root.at("model");
  check_keys(jmodel, "model", {"type", "theta_true", "theta_bound", "b"});
  const std::string plant_type = str_required(jmodel, "type", "model");
  int n = 0, p = 0;
  if (plant_type == "benchmark") {
    cfg.plant = PlantKind::Benchmark;
    n = 2;
    p = 4;
    if (jmodel.contains("b")) throw ConfigError("model.b", "only the scalar-linear plant takes b");
  } else if (plant_type == "scalar-linear") {
    cfg.plant = PlantKind::ScalarLinear;
    n = 1;
    p = 1;
    if (cfg.mode == Mode::BasRl)
      throw ConfigError("mode", "the scalar-linear plant has no barrier embedding");
    cfg.input_gain_b = num_or(jmodel, "b", 1.0, "model");
    if (cfg.input_gain_b == 0.0) throw ConfigError("model.b", "must be nonzero");
  } else {
    throw ConfigError("model.type", "must be 'benchmark' or 'scalar-linear'");
  }
  if (!jmodel.contains("theta_true")) throw ConfigError("model.theta_true", "required");
  cfg.theta_true = parse_vec(jmodel.at("theta_true"), p, "model.theta_true");
  cfg.theta_bound = num_or(jmodel, "theta_bound", 2.0, "model");

  if (root.contains("constraint")) {
    if (cfg.plant == PlantKind::ScalarLinear)
      throw ConfigError("constraint", "not supported for the scalar-linear plant");
    const auto& jcon = root.at("constraint");
    check_keys(jcon, "constraint", {"center", "radius"});
    ConstraintConfig con;
    if (!jcon.contains("center")) throw ConfigError("constraint.center", "required");
    con.center = parse_vec(jcon.at("center"), n, "constraint.center");
    con.radius = num_or(jcon, "radius", 0.5, "constraint");
    cfg.constraint = con;
  }

  if (root.contains("barrier")) {
    if (cfg.mode != Mode::BasRl)
      throw ConfigError("barrier", "only meaningful in bas-rl mode");
    check_keys(root.at("barrier"), "barrier", {"K"});
    cfg.barrier_K = num_or(root.at("barrier"), "K", 0.01, "barrier");
  }

  if (!root.contains("x0")) throw ConfigError("x0", "required");
  cfg.x0 = parse_vec(root.at("x0"), n, "x0");
  cfg.duration = num_or(root, "duration", 10.0, "");
  cfg.dt = num_or(root, "dt", 1e-3, "");
  cfg.log_decimation = int_or(root, "log_decimation", 1, "");
  cfg.chi_ultimate = num_or(root, "chi_ultimate", 0.5, "");

  if (root.contains("observer")) {
    if (cfg.mode != Mode::BasRl)
      throw ConfigError("observer", "only meaningful in bas-rl mode");
    const auto& jobs = root.at("observer");
    check_keys(jobs, "observer", {"gamma", "zhat0"});
    cfg.observer.gamma = num_or(jobs, "gamma", 3.0, "observer");
    cfg.observer.z_hat0 = num_or(jobs, "zhat0", 0.0, "observer");
  }

  const ordered_json jest = root.contains("estimator") ? root.at("estimator")
                                                       : ordered_json::object();
  check_keys(jest, "estimator",
             {"k_theta", "kappa", "beta_theta", "gamma0", "theta_hat0", "stack_capacity",
              "delta_admission", "window", "capture_period"});
  cfg.estimator.k_theta = num_or(jest, "k_theta", 50.0, "estimator");
  cfg.estimator.kappa = num_or(jest, "kappa", 1.0, "estimator");
  cfg.estimator.beta_theta = num_or(jest, "beta_theta", 1.0, "estimator");
  cfg.estimator.Gamma0 = jest.contains("gamma0")
                             ? parse_mat(jest.at("gamma0"), p, "estimator.gamma0")
                             : Mat(10.0 * Mat::Identity(p, p));
  cfg.estimator.theta_hat0 = jest.contains("theta_hat0")
                                 ? parse_vec(jest.at("theta_hat0"), p, "estimator.theta_hat0")
                                 : Vec(Vec::Zero(p));
  cfg.estimator.stack_capacity = int_or(jest, "stack_capacity", 20, "estimator");
  cfg.estimator.delta_admission = num_or(jest, "delta_admission", 0.05, "estimator");
  cfg.estimator.window = num_or(jest, "window", 0.5, "estimator");
  cfg.estimator.capture_period = num_or(jest, "capture_period", 0.1, "estimator");

  const int ns = cfg.mode == Mode::BasRl ? n + 1 : n;
  const char* default_basis =
      ns == 3 ? "quadratic-6" : (ns == 2 ? "quadratic-3" : "quadratic-1");

  const ordered_json jadp = root.contains("adp") ? root.at("adp") : ordered_json::object();
  check_keys(jadp, "adp",
             {"basis", "nu", "k_c1", "k_c2", "k_a1", "k_a2", "beta_c", "upsilon0", "wc0",
              "wa0", "upsilon_floor", "upsilon_ceiling", "grid"});
  cfg.adp.basis = jadp.contains("basis") ? str_required(jadp, "basis", "adp") : default_basis;
  Basis basis;
  try {
    basis = make_basis(cfg.adp.basis);
  } catch (const Error& e) {
    throw ConfigError("adp.basis", e.what());
  }
  const int L = basis.L;
  cfg.adp.nu = num_or(jadp, "nu", 2.0, "adp");
  cfg.adp.k_c1 = num_or(jadp, "k_c1", 1.0, "adp");
  cfg.adp.k_c2 = num_or(jadp, "k_c2", 1.0, "adp");
  cfg.adp.k_a1 = num_or(jadp, "k_a1", 2.0, "adp");
  cfg.adp.k_a2 = num_or(jadp, "k_a2", 1.0, "adp");
  cfg.adp.beta_c = num_or(jadp, "beta_c", 0.1, "adp");
  cfg.adp.Upsilon0 = jadp.contains("upsilon0") ? parse_mat(jadp.at("upsilon0"), L, "adp.upsilon0")
                                               : Mat(0.01 * Mat::Identity(L, L));
  cfg.adp.Wc0 = jadp.contains("wc0") ? parse_vec(jadp.at("wc0"), L, "adp.wc0")
                                     : Vec(Vec::Constant(L, 0.5));
  cfg.adp.Wa0 = jadp.contains("wa0") ? parse_vec(jadp.at("wa0"), L, "adp.wa0")
                                     : Vec(Vec::Constant(L, 0.5));
  cfg.adp.upsilon_floor = num_or(jadp, "upsilon_floor", 1e-6, "adp");
  cfg.adp.upsilon_ceiling = num_or(jadp, "upsilon_ceiling", 1000.0, "adp");

  const ordered_json jgrid = jadp.contains("grid") ? jadp.at("grid") : ordered_json::object();
  check_keys(jgrid, "adp.grid", {"count", "half_width", "z_min", "z_max", "seed"});
  cfg.adp.grid.count = int_or(jgrid, "count", 100, "adp.grid");
  cfg.adp.grid.half_width = num_or(jgrid, "half_width", 2.0, "adp.grid");
  cfg.adp.grid.z_min = num_or(jgrid, "z_min", 0.0, "adp.grid");
  cfg.adp.grid.z_max = num_or(jgrid, "z_max", 0.1, "adp.grid");
  cfg.adp.grid.seed = uint_or(jgrid, "seed", 0, "adp.grid");
  if (!(cfg.adp.grid.half_width > 0.0))
    throw ConfigError("adp.grid.half_width", "must be positive");

  const ordered_json jcost = root.contains("cost") ? root.at("cost") : ordered_json::object();
  check_keys(jcost, "cost", {"Q", "R"});
  cfg.Q = jcost.contains("Q") ? parse_mat(jcost.at("Q"), ns, "cost.Q")
                              : Mat(Mat::Identity(ns, ns));
  const int m = 1;
  cfg.R = jcost.contains("R") ? parse_mat(jcost.at("R"), m, "cost.R")
                              : Mat(Mat::Identity(m, m));

  validate(cfg, n, p, L, ns);
  return cfg;
}

ScenarioConfig parse_config(const std::string& path_or_preset) {
  std::string text;
  if (std::filesystem::exists(path_or_preset)) {
    std::ifstream in(path_or_preset, std::ios::binary);
    if (!in) throw ConfigError("config", "cannot read '" + path_or_preset + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  } else {
    std::string name = std::filesystem::path(path_or_preset).filename().string();
    if (name.size() > 5 && name.ends_with(".json")) name = name.substr(0, name.size() - 5);
    bool found = false;
    for (const auto& p : preset_names())
      if (p == name) {
        found = true;
        break;
      }
    if (!found)
      throw ConfigError("config",
                        "'" + path_or_preset + "' is neither a file nor a bundled preset");
    text = preset_text(name);
  }
  ScenarioConfig cfg = parse_config_text(text);

  if (const char* env = std::getenv("BASTION_SEED"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const unsigned long long seed = std::strtoull(env, &end, 10);
    if (end == nullptr || *end != '\0')
      throw ConfigError("BASTION_SEED", "must be a non-negative integer");
    cfg.adp.grid.seed = seed;
  }
  return cfg;
}

namespace {

ordered_json vec_json(const Vec& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

ordered_json mat_json(const Mat& M) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

std::string serialize_config(const ScenarioConfig& cfg) {
  ordered_json j;
  j["name"] = cfg.name;
  j["mode"] = cfg.mode == Mode::BasRl ? "bas-rl" : "no-safety";
  ordered_json jm;
  jm["type"] = cfg.plant == PlantKind::Benchmark ? "benchmark" : "scalar-linear";
  jm["theta_true"] = vec_json(cfg.theta_true);
  jm["theta_bound"] = cfg.theta_bound;
  if (cfg.plant == PlantKind::ScalarLinear) jm["b"] = cfg.input_gain_b;
  j["model"] = jm;
  if (cfg.constraint.has_value()) {
    ordered_json jc;
    jc["center"] = vec_json(cfg.constraint->center);
    jc["radius"] = cfg.constraint->radius;
    j["constraint"] = jc;
  }
  if (cfg.mode == Mode::BasRl) {
    j["barrier"] = ordered_json{{"K", cfg.barrier_K}};
    j["observer"] = ordered_json{{"gamma", cfg.observer.gamma}, {"zhat0", cfg.observer.z_hat0}};
  }
  j["x0"] = vec_json(cfg.x0);
  j["duration"] = cfg.duration;
  j["dt"] = cfg.dt;
  j["log_decimation"] = cfg.log_decimation;
  j["chi_ultimate"] = cfg.chi_ultimate;
  ordered_json je;
  je["k_theta"] = cfg.estimator.k_theta;
  je["kappa"] = cfg.estimator.kappa;
  je["beta_theta"] = cfg.estimator.beta_theta;
  je["gamma0"] = mat_json(cfg.estimator.Gamma0);
  je["theta_hat0"] = vec_json(cfg.estimator.theta_hat0);
  je["stack_capacity"] = cfg.estimator.stack_capacity;
  je["delta_admission"] = cfg.estimator.delta_admission;
  je["window"] = cfg.estimator.window;
  je["capture_period"] = cfg.estimator.capture_period;
  j["estimator"] = je;
  ordered_json ja;
  ja["basis"] = cfg.adp.basis;
  ja["nu"] = cfg.adp.nu;
  ja["k_c1"] = cfg.adp.k_c1;
  ja["k_c2"] = cfg.adp.k_c2;
  ja["k_a1"] = cfg.adp.k_a1;
  ja["k_a2"] = cfg.adp.k_a2;
  ja["beta_c"] = cfg.adp.beta_c;
  ja["upsilon0"] = mat_json(cfg.adp.Upsilon0);
  ja["wc0"] = vec_json(cfg.adp.Wc0);
  ja["wa0"] = vec_json(cfg.adp.Wa0);
  ja["upsilon_floor"] = cfg.adp.upsilon_floor;
  ja["upsilon_ceiling"] = cfg.adp.upsilon_ceiling;
  ja["grid"] = ordered_json{{"count", cfg.adp.grid.count},
                            {"half_width", cfg.adp.grid.half_width},
                            {"z_min", cfg.adp.grid.z_min},
                            {"z_max", cfg.adp.grid.z_max},
                            {"seed", cfg.adp.grid.seed}};
  j["adp"] = ja;
  j["cost"] = ordered_json{{"Q", mat_json(cfg.Q)}, {"R", mat_json(cfg.R)}};
  return j.dump(2) + "\n";
}

std::string git_blob_hash(const std::string& content) {
  std::string preimage = "blob " + std::to_string(content.size());
  preimage.push_back('\0');
  preimage += content;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(preimage.data(), preimage.size(), digest, &len, EVP_sha1(), nullptr) != 1)
    throw Error("git_blob_hash: digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

}  // namespace bastion
