#include "bastion/config.hpp"

#include <array>
#include <utility>

namespace bastion {

namespace {

// Obstacle-avoidance benchmark with the barrier-state controller.
constexpr const char* kCase7Bas = R"json({
  "name": "case7_bas",
  "mode": "bas-rl",
  "model": {
    "type": "benchmark",
    "theta_true": [-1.0, -1.0, -0.5, -0.5],
    "theta_bound": 2.0
  },
  "constraint": { "center": [1.0, 2.0], "radius": 0.5 },
  "barrier": { "K": 0.01 },
  "x0": [2.5, 4.0],
  "duration": 10.0,
  "dt": 0.001,
  "observer": { "gamma": 3.0, "zhat0": 0.0 },
  "estimator": {
    "k_theta": 50.0,
    "kappa": 1.0,
    "beta_theta": 1.0,
    "gamma0": 10.0,
    "theta_hat0": 0.0,
    "stack_capacity": 20,
    "delta_admission": 0.05,
    "window": 0.5,
    "capture_period": 0.1
  },
  "adp": {
    "basis": "quadratic-6",
    "nu": 2.0,
    "k_c1": 1.0,
    "k_c2": 1.0,
    "k_a1": 2.0,
    "k_a2": 1.0,
    "beta_c": 0.1,
    "upsilon0": 0.01,
    "wc0": 0.5,
    "wa0": 0.5,
    "grid": { "count": 100, "half_width": 2.0, "z_min": 0.0, "z_max": 0.1, "seed": 0 }
  },
  "cost": { "Q": 1.0, "R": 1.0 }
})json";

// Same benchmark with the obstacle moved to (2,2), the variant shown in plots.
constexpr const char* kCase7BasFigure = R"json({
  "name": "case7_bas_figure",
  "mode": "bas-rl",
  "model": {
    "type": "benchmark",
    "theta_true": [-1.0, -1.0, -0.5, -0.5],
    "theta_bound": 2.0
  },
  "constraint": { "center": [2.0, 2.0], "radius": 0.5 },
  "barrier": { "K": 0.01 },
  "x0": [2.5, 4.0],
  "duration": 10.0,
  "dt": 0.001,
  "observer": { "gamma": 3.0, "zhat0": 0.0 },
  "estimator": {
    "k_theta": 50.0,
    "kappa": 1.0,
    "beta_theta": 1.0,
    "gamma0": 10.0,
    "theta_hat0": 0.0,
    "stack_capacity": 20,
    "delta_admission": 0.05,
    "window": 0.5,
    "capture_period": 0.1
  },
  "adp": {
    "basis": "quadratic-6",
    "nu": 2.0,
    "k_c1": 1.0,
    "k_c2": 1.0,
    "k_a1": 2.0,
    "k_a2": 1.0,
    "beta_c": 0.1,
    "upsilon0": 0.01,
    "wc0": 0.5,
    "wa0": 0.5,
    "grid": { "count": 100, "half_width": 2.0, "z_min": 0.0, "z_max": 0.1, "seed": 0 }
  },
  "cost": { "Q": 1.0, "R": 1.0 }
})json";

// Same plant and learning stack, but no barrier embedding: the obstacle is
// only monitored, so the closed loop may cut through it.
constexpr const char* kCase7NoSafety = R"json({
  "name": "case7_nosafety",
  "mode": "no-safety",
  "model": {
    "type": "benchmark",
    "theta_true": [-1.0, -1.0, -0.5, -0.5],
    "theta_bound": 2.0
  },
  "constraint": { "center": [1.0, 2.0], "radius": 0.5 },
  "x0": [2.5, 4.0],
  "duration": 10.0,
  "dt": 0.001,
  "estimator": {
    "k_theta": 50.0,
    "kappa": 1.0,
    "beta_theta": 1.0,
    "gamma0": 10.0,
    "theta_hat0": 0.0,
    "stack_capacity": 20,
    "delta_admission": 0.05,
    "window": 0.5,
    "capture_period": 0.1
  },
  "adp": {
    "basis": "quadratic-3",
    "nu": 2.0,
    "k_c1": 1.0,
    "k_c2": 1.0,
    "k_a1": 2.0,
    "k_a2": 1.0,
    "beta_c": 0.1,
    "upsilon0": 0.01,
    "wc0": 0.5,
    "wa0": 0.5,
    "grid": { "count": 100, "half_width": 2.0, "seed": 0 }
  },
  "cost": { "Q": 1.0, "R": 1.0 }
})json";

// Scalar linear plant whose optimal value function is known in closed form;
// used to cross-check the learned critic against the Riccati solution.
constexpr const char* kOracleLqr = R"json({
  "name": "oracle_lqr",
  "mode": "no-safety",
  "model": {
    "type": "scalar-linear",
    "theta_true": [-1.0],
    "theta_bound": 2.0,
    "b": 1.0
  },
  "x0": [2.0],
  "duration": 20.0,
  "dt": 0.001,
  "estimator": {
    "k_theta": 50.0,
    "kappa": 1.0,
    "beta_theta": 1.0,
    "gamma0": 10.0,
    "theta_hat0": 0.0,
    "stack_capacity": 10,
    "delta_admission": 0.05,
    "window": 0.5,
    "capture_period": 0.1
  },
  "adp": {
    "basis": "quadratic-1",
    "nu": 1.0,
    "k_c1": 1.0,
    "k_c2": 2.0,
    "k_a1": 20.0,
    "k_a2": 0.01,
    "beta_c": 0.5,
    "upsilon0": 1.0,
    "wc0": 1.0,
    "wa0": 1.0,
    "grid": { "count": 20, "half_width": 2.0, "seed": 0 }
  },
  "cost": { "Q": 1.0, "R": 1.0 }
})json";

// Two-second variant of the benchmark for quick command-line checks.
constexpr const char* kCase7Smoke = R"json({
  "name": "case7_smoke",
  "mode": "bas-rl",
  "model": {
    "type": "benchmark",
    "theta_true": [-1.0, -1.0, -0.5, -0.5],
    "theta_bound": 2.0
  },
  "constraint": { "center": [1.0, 2.0], "radius": 0.5 },
  "barrier": { "K": 0.01 },
  "x0": [2.5, 4.0],
  "duration": 2.0,
  "dt": 0.001,
  "log_decimation": 10,
  "observer": { "gamma": 3.0, "zhat0": 0.0 },
  "estimator": {
    "k_theta": 50.0,
    "kappa": 1.0,
    "beta_theta": 1.0,
    "gamma0": 10.0,
    "theta_hat0": 0.0,
    "stack_capacity": 20,
    "delta_admission": 0.05,
    "window": 0.5,
    "capture_period": 0.1
  },
  "adp": {
    "basis": "quadratic-6",
    "nu": 2.0,
    "k_c1": 1.0,
    "k_c2": 1.0,
    "k_a1": 2.0,
    "k_a2": 1.0,
    "beta_c": 0.1,
    "upsilon0": 0.01,
    "wc0": 0.5,
    "wa0": 0.5,
    "grid": { "count": 100, "half_width": 2.0, "z_min": 0.0, "z_max": 0.1, "seed": 0 }
  },
  "cost": { "Q": 1.0, "R": 1.0 }
})json";

constexpr std::array<std::pair<const char*, const char*>, 5> kPresets = {{
    {"case7_bas", kCase7Bas},
    {"case7_bas_figure", kCase7BasFigure},
    {"case7_nosafety", kCase7NoSafety},
    {"oracle_lqr", kOracleLqr},
    {"case7_smoke", kCase7Smoke},
}};

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  names.reserve(kPresets.size());
  for (const auto& [name, text] : kPresets) names.emplace_back(name);
  return names;
}

std::string preset_text(const std::string& name) {
  for (const auto& [key, text] : kPresets)
    if (name == key) return std::string(text) + "\n";
  throw ConfigError("preset", "no bundled preset named '" + name + "'");
}

}  // namespace bastion
