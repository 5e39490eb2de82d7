#pragma once

/// @file estimator.hpp
/// Barrier-state observer, projection-bounded ICL parameter estimator with a
/// least-squares gain, and the history stack with min-eigenvalue admission.
///
/// Update laws (z~ = z - z_hat, residual r_i = X_i - Gfu_i - Y_i theta_hat):
///   z_hat'     = Phi(z + beta0) grad_h (Y theta_hat + f + g u) + gamma (z - z_hat)
///   phi        = Y^T grad_h^T Phi^T z~ + k_theta sum_i sigma_i Y_i^T r_i
///   theta_hat' = proj(theta_hat, Gamma phi)
///   Gamma'     = beta_theta Gamma - k_theta Gamma Sigma_Y Gamma   (or 0, frozen)

#include <vector>

#include "bastion/model.hpp"
#include "bastion/numerics.hpp"

namespace bastion {

struct EstimatorState {
  Vec theta_hat;
  Mat Gamma;  // symmetric positive definite least-squares gain
  double z_hat = 0.0;
};

/// One integrated trajectory window: X = x(t) - x(t-T), Y = integral of the
/// regressor, Gfu = integral of the known drift + input term. Satisfies
/// X = Y theta_true + Gfu up to quadrature error.
struct HistoryEntry {
  Vec X;
  Mat Y;
  Vec Gfu;
  double sigma = 1.0;  // 1 / (1 + kappa |Y|_F^2), fixed at capture
  double t = 0.0;      // capture time (window end)
};

struct AdmitResult {
  bool admitted = false;
  int slot = -1;
  double min_eig_before = 0.0;
  double min_eig_after = 0.0;
};

/// Fixed-capacity store of history entries managed to maximize
/// lambda_min(Sigma_Y), Sigma_Y = sum_i sigma_i Y_i^T Y_i.
/// Below capacity every candidate is appended; at capacity a candidate
/// replaces the best slot only when that raises lambda_min by the (1 + delta)
/// admission margin, which makes the cached min_eig non-decreasing from then on.
class HistoryStack {
 public:
  HistoryStack(int capacity, double delta_admission, double kappa, int p);

  int size() const { return static_cast<int>(entries_.size()); }
  int capacity() const { return capacity_; }
  bool full() const { return size() == capacity_; }
  double kappa() const { return kappa_; }
  double delta_admission() const { return delta_; }
  const std::vector<HistoryEntry>& entries() const { return entries_; }

  /// Cached lambda_min(Sigma_Y); 0 for an empty stack.
  double min_eig() const { return min_eig_; }
  /// Cached Sigma_Y = sum_i sigma_i Y_i^T Y_i.
  const Mat& Sigma_Y() const { return Sigma_Y_; }
  /// Cached sum_i sigma_i Y_i^T (X_i - Gfu_i), the theta-free residual part.
  const Vec& residual_rhs() const { return rhs_; }

  AdmitResult try_admit(const HistoryEntry& candidate);

  /// Sigma_Y rebuilt from entries, for verifying the cache.
  Mat recompute_sigma() const;

 private:
  void refresh();

  int capacity_;
  double delta_;
  double kappa_;
  int p_;
  std::vector<HistoryEntry> entries_;
  Mat Sigma_Y_;
  Vec rhs_;
  double min_eig_ = 0.0;
};

/// Raw trajectory sample feeding window captures.
struct BufferSample {
  double t = 0.0;
  Vec x;
  Vec u;
};

/// Sliding window of per-step samples spanning the capture interval T.
class TrajectoryBuffer {
 public:
  explicit TrajectoryBuffer(double window);
  void push(double t, const Vec& x, const Vec& u);
  bool spans_window() const;
  const std::vector<BufferSample>& samples() const { return samples_; }
  double window() const { return window_; }

 private:
  double window_;
  std::vector<BufferSample> samples_;
};

/// Projection of an update direction v at estimate mu with gain Gamma:
/// v unchanged in the interior of the theta_bound ball or when v points
/// inward on the boundary; tangentially projected otherwise so that
/// mu^T out <= 0 on the boundary. Boundary band: | |mu| - bound | <= 1e-9 bound.
Vec project(const Vec& mu, const Vec& v, const Mat& Gamma, double theta_bound);

/// Barrier-state observer derivative (see file header).
double observer_deriv(const EstimatorState& est, const Vec& x, double z, const Vec& u,
                      const PlantModel& model, const BarrierSpec& spec, double gamma_obs);

/// Integrate one window of samples into a history entry. The window must hold
/// at least two strictly time-ordered samples; sigma uses the stack's kappa.
HistoryEntry capture_window(const PlantModel& model, std::span<const BufferSample> window,
                            double kappa);

/// The ICL innovation phi. Pass spec = nullptr to drop the observer term
/// (plants running without the barrier embedding).
Vec icl_phi(const EstimatorState& est, const HistoryStack& stack, const PlantModel& model,
            const BarrierSpec* spec, const Vec& x, double z, double k_theta);

/// Projected estimator derivative proj(theta_hat, Gamma phi).
Vec theta_deriv(const EstimatorState& est, const HistoryStack& stack, const PlantModel& model,
                const BarrierSpec* spec, const Vec& x, double z, double k_theta);

/// Least-squares gain derivative; frozen (zero) when theta_hat rides the
/// boundary and the unprojected update pushes outward.
Mat gamma_deriv(const EstimatorState& est, const HistoryStack& stack, const Vec& phi,
                double beta_theta, double k_theta, double theta_bound);

/// Advisory gain-condition diagnostic: beta_theta / (k_theta Gamma_bar)
/// versus the stack excitation level sigma_theta = lambda_min(Sigma_Y).
struct GainConditionReport {
  bool applicable = false;  // needs a full-rank stack
  double lhs = 0.0;         // beta_theta / (k_theta * Gamma_bar)
  double sigma_theta = 0.0;
  bool holds = false;
};

GainConditionReport check_theorem2_gains(double beta_theta, double k_theta, double Gamma_bar,
                                         const HistoryStack& stack);

}  // namespace bastion
