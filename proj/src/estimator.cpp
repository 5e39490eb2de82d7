#include "bastion/estimator.hpp"

#include <cmath>
#include <limits>

namespace bastion {

HistoryStack::HistoryStack(int capacity, double delta_admission, double kappa, int p)
    : capacity_(capacity), delta_(delta_admission), kappa_(kappa), p_(p) {
  if (capacity < 1) throw Error("HistoryStack: capacity must be >= 1");
  if (!(delta_admission > 0.0)) throw Error("HistoryStack: admission margin must be > 0");
  if (!(kappa > 0.0)) throw Error("HistoryStack: kappa must be > 0");
  if (p < 1) throw Error("HistoryStack: parameter dimension must be >= 1");
  Sigma_Y_ = Mat::Zero(p, p);
  rhs_ = Vec::Zero(p);
}

Mat HistoryStack::recompute_sigma() const {
  Mat S = Mat::Zero(p_, p_);
  for (const auto& e : entries_) S += e.sigma * (e.Y.transpose() * e.Y);
  return S;
}

void HistoryStack::refresh() {
  Sigma_Y_ = recompute_sigma();
  rhs_ = Vec::Zero(p_);
  for (const auto& e : entries_) rhs_ += e.sigma * (e.Y.transpose() * (e.X - e.Gfu));
  min_eig_ = entries_.empty() ? 0.0 : sym_min_eig(Sigma_Y_);
}

AdmitResult HistoryStack::try_admit(const HistoryEntry& candidate) {
  if (candidate.Y.cols() != p_) throw DimensionError("try_admit: regressor width mismatch");
  AdmitResult res;
  res.min_eig_before = min_eig_;

  if (!full()) {
    res.admitted = true;
    res.slot = size();
    entries_.push_back(candidate);
    refresh();
    res.min_eig_after = min_eig_;
    return res;
  }

  // Exhaustive replacement scan: rank-one-style swap of each slot's
  // contribution inside the cached Gram matrix.
  const Mat cand_term = candidate.sigma * (candidate.Y.transpose() * candidate.Y);
  double best_eig = -std::numeric_limits<double>::infinity();
  int best_slot = -1;
  for (int j = 0; j < capacity_; ++j) {
    const auto& e = entries_[static_cast<size_t>(j)];
    const Mat trial = Sigma_Y_ - e.sigma * (e.Y.transpose() * e.Y) + cand_term;
    const double eig = sym_min_eig(0.5 * (trial + trial.transpose()));
    if (eig > best_eig) {
      best_eig = eig;
      best_slot = j;
    }
  }

  if (min_eig_ < best_eig / (1.0 + delta_)) {
    entries_[static_cast<size_t>(best_slot)] = candidate;
    refresh();
    res.admitted = true;
    res.slot = best_slot;
  }
  res.min_eig_after = min_eig_;
  return res;
}

TrajectoryBuffer::TrajectoryBuffer(double window) : window_(window) {
  if (!(window > 0.0)) throw Error("TrajectoryBuffer: window must be positive");
}

void TrajectoryBuffer::push(double t, const Vec& x, const Vec& u) {
  if (!samples_.empty() && !(t > samples_.back().t))
    throw Error("TrajectoryBuffer: times must be strictly increasing");
  samples_.push_back(BufferSample{t, x, u});
  // Keep exactly the [t - T, t] slice (the sample at t - T included).
  const double cutoff = t - window_ - 1e-12;
  size_t first = 0;
  while (first < samples_.size() && samples_[first].t < cutoff) ++first;
  if (first > 0) samples_.erase(samples_.begin(), samples_.begin() + static_cast<long>(first));
}

bool TrajectoryBuffer::spans_window() const {
  return samples_.size() >= 2 &&
         samples_.back().t - samples_.front().t >= window_ - 1e-9;
}

Vec project(const Vec& mu, const Vec& v, const Mat& Gamma, double theta_bound) {
  if (mu.size() != v.size() || Gamma.rows() != mu.size() || Gamma.cols() != mu.size())
    throw DimensionError("project: dimension mismatch");
  if (!(theta_bound > 0.0)) throw Error("project: theta_bound must be positive");
  const double norm_mu = mu.norm();
  const bool on_boundary = std::abs(norm_mu - theta_bound) <= 1e-9 * theta_bound ||
                           norm_mu > theta_bound;
  if (!on_boundary) return v;
  const double outward = mu.dot(v);
  if (outward <= 0.0) return v;
  const double denom = mu.dot(Gamma * mu);
  if (!(denom > 0.0))
    throw DegenerateGainError("project: mu^T Gamma mu is not positive on the boundary");
  return v - (Gamma * mu) * (outward / denom);
}

double observer_deriv(const EstimatorState& est, const Vec& x, double z, const Vec& u,
                      const PlantModel& model, const BarrierSpec& spec, double gamma_obs) {
  const double phi = eval_phi(spec, z + spec.beta0);
  const Vec xdot_hat = model.Y(x) * est.theta_hat + model.f(x) + model.g(x) * u;
  return phi * spec.grad_h(x).dot(xdot_hat) + gamma_obs * (z - est.z_hat);
}

HistoryEntry capture_window(const PlantModel& model, std::span<const BufferSample> window,
                            double kappa) {
  if (window.size() < 2)
    throw InsufficientDataError("capture_window: need at least two samples");
  std::vector<double> times(window.size());
  std::vector<Mat> regressors(window.size());
  std::vector<Vec> known(window.size());
  for (size_t i = 0; i < window.size(); ++i) {
    if (i > 0 && !(window[i].t > window[i - 1].t))
      throw Error("capture_window: times must be strictly increasing");
    times[i] = window[i].t;
    regressors[i] = model.Y(window[i].x);
    known[i] = model.f(window[i].x) + model.g(window[i].x) * window[i].u;
  }
  HistoryEntry entry;
  entry.X = window.back().x - window.front().x;
  entry.Y = trapezoid_accumulate(std::span<const double>(times),
                                 std::span<const Mat>(regressors));
  entry.Gfu = trapezoid_accumulate(std::span<const double>(times),
                                   std::span<const Vec>(known));
  entry.sigma = 1.0 / (1.0 + kappa * entry.Y.squaredNorm());
  entry.t = window.back().t;
  return entry;
}

Vec icl_phi(const EstimatorState& est, const HistoryStack& stack, const PlantModel& model,
            const BarrierSpec* spec, const Vec& x, double z, double k_theta) {
  Vec phi = Vec::Zero(model.p);
  if (spec != nullptr) {
    const double Phi = eval_phi(*spec, z + spec->beta0);
    const double z_tilde = z - est.z_hat;
    phi += (Phi * z_tilde) * (model.Y(x).transpose() * spec->grad_h(x));
  }
  if (stack.size() > 0)
    phi += k_theta * (stack.residual_rhs() - stack.Sigma_Y() * est.theta_hat);
  return phi;
}

Vec theta_deriv(const EstimatorState& est, const HistoryStack& stack, const PlantModel& model,
                const BarrierSpec* spec, const Vec& x, double z, double k_theta) {
  const Vec phi = icl_phi(est, stack, model, spec, x, z, k_theta);
  return project(est.theta_hat, est.Gamma * phi, est.Gamma, model.theta_bound);
}

Mat gamma_deriv(const EstimatorState& est, const HistoryStack& stack, const Vec& phi,
                double beta_theta, double k_theta, double theta_bound) {
  const double norm_theta = est.theta_hat.norm();
  const bool on_boundary = std::abs(norm_theta - theta_bound) <= 1e-9 * theta_bound ||
                           norm_theta > theta_bound;
  if (on_boundary && (est.Gamma * phi).dot(est.theta_hat) > 0.0)
    return Mat::Zero(est.Gamma.rows(), est.Gamma.cols());
  Mat dG = beta_theta * est.Gamma;
  if (stack.size() > 0) dG -= k_theta * (est.Gamma * stack.Sigma_Y() * est.Gamma);
  return 0.5 * (dG + dG.transpose());
}

GainConditionReport check_theorem2_gains(double beta_theta, double k_theta, double Gamma_bar,
                                         const HistoryStack& stack) {
  GainConditionReport report;
  report.applicable = stack.size() > 0 && stack.min_eig() > 0.0;
  if (!report.applicable) return report;
  report.lhs = beta_theta / (k_theta * Gamma_bar);
  report.sigma_theta = stack.min_eig();
  report.holds = report.lhs > report.sigma_theta;
  return report;
}

}  // namespace bastion
