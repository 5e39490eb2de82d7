#pragma once

/// @file sim.hpp
/// Closed-loop scenario execution: joint fixed-step RK4 integration of the
/// plant, barrier state, observer, ICL estimator (theta_hat, Gamma), critic
/// (Wc, Upsilon), and actor (Wa), with history-stack captures between steps.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bastion/adp.hpp"
#include "bastion/estimator.hpp"
#include "bastion/model.hpp"
#include "bastion/numerics.hpp"

namespace bastion {

enum class Mode { BasRl, NoSafety };
enum class PlantKind { Benchmark, ScalarLinear };

struct ObserverConfig {
  double gamma = 3.0;
  double z_hat0 = 0.0;
};

struct EstimatorConfig {
  double k_theta = 50.0;
  double kappa = 1.0;
  double beta_theta = 1.0;
  Mat Gamma0;
  Vec theta_hat0;
  int stack_capacity = 20;
  double delta_admission = 0.05;
  double window = 0.5;          // integration window T
  double capture_period = 0.1;  // capture attempt cadence once t >= T
};

struct AdpConfig {
  std::string basis = "quadratic-6";
  double nu = 2.0;
  double k_c1 = 1.0;
  double k_c2 = 1.0;
  double k_a1 = 2.0;
  double k_a2 = 1.0;
  double beta_c = 0.1;
  Mat Upsilon0;
  Vec Wc0;
  Vec Wa0;
  double upsilon_floor = 1e-6;     // forgetting suspended below this lambda_min
  double upsilon_ceiling = 1000.0; // ... or above this lambda_max
  GridSpec grid;
};

struct ConstraintConfig {
  Vec center;
  double radius = 0.5;
};

struct ScenarioConfig {
  std::string name = "scenario";
  Mode mode = Mode::BasRl;
  PlantKind plant = PlantKind::Benchmark;
  Vec theta_true;
  double theta_bound = 2.0;
  double input_gain_b = 1.0;  // scalar-linear plant only
  std::optional<ConstraintConfig> constraint;
  double barrier_K = 0.01;
  Vec x0;
  double duration = 10.0;
  double dt = 1e-3;
  int log_decimation = 1;
  double chi_ultimate = 0.5;  // accepted last-10% sup norm of (x, z~, theta~)
  ObserverConfig observer;
  EstimatorConfig estimator;
  AdpConfig adp;
  Mat Q;
  Mat R;
};

struct LogRow {
  double t = 0.0;
  Vec x;
  double z = 0.0;
  double zhat = 0.0;
  Vec theta_hat;
  double theta_err = 0.0;  // |theta_true - theta_hat|
  Vec Wc;
  Vec Wa;
  Vec u;
  double delta = 0.0;
  double h = 0.0;
  double sigmin_stack = 0.0;
  double sigmin_grid = 0.0;
  double J = 0.0;  // running cost integral up to this row's t
};

enum class RunStatus { Ok, SafetyViolation, Blowup };

struct AdmissionEvent {
  double t = 0.0;
  int slot = -1;
  double min_eig_before = 0.0;
  double min_eig_after = 0.0;
};

struct Metrics {
  double min_h = 0.0;
  double argmin_t = 0.0;
  double theta_err_final = 0.0;
  double J_total = 0.0;
  double ultimate_bound_last10 = 0.0;
};

struct RunResult {
  ScenarioConfig config;
  std::vector<LogRow> rows;
  RunStatus status = RunStatus::Ok;
  std::string error_kind;
  std::string error_detail;
  double error_t = 0.0;

  Metrics metrics;
  double sigmin_grid_inf = 0.0;
  double omega_over_rho_max = 0.0;
  double gamma_eig_min = 0.0, gamma_eig_max = 0.0;      // observed over log rows
  double upsilon_eig_min = 0.0, upsilon_eig_max = 0.0;  // observed over log rows
  double stack_full_time = -1.0;
  std::vector<AdmissionEvent> admissions;
  std::vector<HistoryEntry> admitted_entries;  // every entry ever admitted
  std::vector<HistoryEntry> final_entries;     // stack snapshot at run end
  double stack_min_eig_final = 0.0;
  GainConditionReport theorem2;
  std::vector<std::pair<double, double>> incursions;  // h<0 intervals (no-safety)
  int violation_count = 0;
};

/// Everything closed_loop_deriv needs besides the integrated state; built
/// once per run. The stack pointer is frozen within each RK4 step.
struct SimContext {
  ScenarioConfig cfg;
  PlantModel model;
  std::optional<BarrierSpec> barrier;
  Basis basis;
  SystemMaps system;
  ExtrapolationGrid grid;
  std::shared_ptr<GridWorkspace> grid_ws;
  int ns = 0;
};

SimContext make_context(const ScenarioConfig& cfg);

/// The jointly integrated state bundle.
struct FullState {
  Vec x;
  double z = 0.0;
  double zhat = 0.0;
  Vec theta_hat;
  Mat Gamma;
  Vec Wc;
  Mat Upsilon;
  Vec Wa;
};

/// Flat packing of FullState for the RK4 kernel.
int bundle_size(const SimContext& ctx);
Vec pack_bundle(const SimContext& ctx, const FullState& st);
FullState unpack_bundle(const SimContext& ctx, const Vec& y);

/// Per-evaluation observables surfaced to the log.
struct StepAux {
  Vec u;
  double delta = 0.0;
  double omega_over_rho = 0.0;
  double h = 0.0;
  Mat grid_gram;  // sum_k omega_k omega_k^T / rho_k^2 (unnormalized)
};

/// One consistent derivative evaluation of the whole bundle: the control is
/// computed once from the actor and shared by plant, barrier state, observer,
/// and every learner; stack data is frozen. Pass aux to capture observables.
FullState closed_loop_deriv(const SimContext& ctx, const HistoryStack& stack,
                            const FullState& st, double t, bool suspend_forgetting,
                            StepAux* aux = nullptr);

RunResult run_scenario(const ScenarioConfig& cfg);

/// Log-derived metrics; J is read off the accumulated running-cost column.
Metrics compute_metrics(const std::vector<LogRow>& rows);

/// Closed-form scalar ARE oracle paired with an ADP run on the same plant.
struct LqrOracleReport {
  double a = 0.0, b = 0.0, q = 0.0, r = 0.0;
  double P_star = 0.0;
  double Wc_final = 0.0, Wa_final = 0.0;
  double err_Wc = 0.0, err_Wa = 0.0;  // relative to P_star
  bool within_2pct = false;
};

/// P* solving 2 a P - P^2 b^2 / r + q = 0 (positive root).
double scalar_are_solution(double a, double b, double q, double r);

LqrOracleReport run_lqr_oracle(const ScenarioConfig& cfg);

}  // namespace bastion
