#pragma once

/// @file adp.hpp
/// Actor-critic approximate dynamic programming over the (optionally
/// barrier-augmented) system maps: value basis, Bellman error with fixed-grid
/// extrapolation, and the coupled critic / least-squares / actor update laws.
///
/// With V ~ Wc^T sigma(s) and u ~ -1/2 R^-1 G^T grad_sigma^T Wa:
///   delta  = s^T Q s + u^T R u + Wc^T omega,   omega = grad_sigma (A theta_hat + F + G u)
///   rho    = 1 + nu omega^T omega
///   Wc'    = -k_c1 Upsilon (omega/rho) delta - (k_c2/M) Upsilon sum_k (omega_k/rho_k) delta_k
///   Ups'   = beta_c Ups - k_c1 Ups (omega omega^T/rho^2) Ups - (k_c2/M) Ups (sum_k ...) Ups
///   Wa'    = -k_a1 (Wa - Wc) - k_a2 Wa + (k_c1/(4 rho)) G_sig Wa omega^T Wc
///            + sum_k (k_c2/(4 M rho_k)) G_sig_k Wa omega_k^T Wc,
/// where G_sig = grad_sigma G R^-1 G^T grad_sigma^T.

#include <string>
#include <vector>

#include "bastion/model.hpp"
#include "bastion/numerics.hpp"

namespace bastion {

struct Basis {
  int L = 0;   // feature count
  int ns = 0;  // state dimension the basis expects
  std::string name;
  std::function<Vec(const Vec&)> sigma;
  std::function<Mat(const Vec&)> grad_sigma;  // L x ns
};

/// Built-in quadratic bases: "quadratic-6" over (s1, s2, s3) =
/// [s1^2, s2^2, s3^2, s1 s2, s2 s3, s3 s1]; "quadratic-3" over (s1, s2) =
/// [s1^2, s2^2, s1 s2]; "quadratic-1" = [s1^2]. All vanish at 0.
Basis make_basis(const std::string& name);

struct CriticState {
  Vec Wc;
  Mat Upsilon;  // symmetric PD least-squares gain
};

struct ActorState {
  Vec Wa;
};

struct ExtrapolationGrid {
  std::vector<Vec> points;
  int M() const { return static_cast<int>(points.size()); }
};

struct GridSpec {
  int count = 100;
  double half_width = 2.0;  // x-box [-hw, hw]^2 (or [-hw, hw] in 1-D)
  double z_min = 0.0;       // barrier-state extent of the box (3-D grids)
  double z_max = 0.1;
  unsigned long long seed = 0;
};

/// One Bellman-error evaluation at a state.
struct BellmanEval {
  double delta = 0.0;
  Vec omega;
  double rho = 1.0;
  Vec gsigma_wa;  // G_sig * Wa at the same state, reused by the actor law
};

/// Grid evaluations reduced to the sums the update laws consume, in fixed
/// point order (determinism contract).
struct ExtrapSums {
  int M = 0;
  Vec weighted_delta;  // sum_k (omega_k / rho_k) delta_k
  Mat gram;            // sum_k omega_k omega_k^T / rho_k^2
  Vec actor_term;      // sum_k (1 / rho_k) G_sig_k Wa (omega_k^T Wc)
  explicit ExtrapSums(int L = 0)
      : weighted_delta(Vec::Zero(L)), gram(Mat::Zero(L, L)), actor_term(Vec::Zero(L)) {}
};

double critic_value(const Basis& basis, const CriticState& critic, const Vec& s);

/// u = -1/2 R^-1 G^T grad_sigma(s)^T Wa.
Vec actor_control(const Basis& basis, const ActorState& actor, const Vec& s, const Mat& G,
                  const Mat& R);

BellmanEval bellman_error(const Basis& basis, const CriticState& critic,
                          const ActorState& actor, const Vec& s, const Vec& theta_hat,
                          const SystemMaps& system, const Mat& Q, const Mat& R, double nu);

/// Pure map of bellman_error over the grid points.
std::vector<BellmanEval> extrapolated_bellman(const ExtrapolationGrid& grid,
                                              const Basis& basis, const CriticState& critic,
                                              const ActorState& actor, const Vec& theta_hat,
                                              const SystemMaps& system, const Mat& Q,
                                              const Mat& R, double nu);

ExtrapSums reduce_extrapolation(std::span<const BellmanEval> evals, const Vec& Wc, int L);

/// The update laws. Empty extrapolation sums (M = 0) drop the grid terms.
Vec critic_deriv(const CriticState& critic, const BellmanEval& on, const ExtrapSums& sums,
                 double k_c1, double k_c2);
Mat upsilon_deriv(const CriticState& critic, const BellmanEval& on, const ExtrapSums& sums,
                  double beta_c, double k_c1, double k_c2, bool suspend_forgetting = false);
Vec actor_deriv(const ActorState& actor, const CriticState& critic, const BellmanEval& on,
                const ExtrapSums& sums, double k_a1, double k_a2, double k_c1, double k_c2);

/// The control actually fed to the plant: actor_control at the current state
/// with the current actor weights.
Vec applied_control(const Basis& basis, const ActorState& actor, const Vec& s,
                    const SystemMaps& system, const Mat& R);

/// Deterministic Halton layout inside the configured box, filtered to the
/// barrier domain (z + beta0 > 0) when a barrier is present and dim == 3.
/// count == 1 degenerates to the box center.
ExtrapolationGrid build_grid(const GridSpec& spec, int dim, const BarrierSpec* barrier);

/// Precomputed per-point statics of a fixed grid; evaluate() returns exactly
/// reduce_extrapolation(extrapolated_bellman(...)) but without re-deriving the
/// state-dependent maps every call.
class GridWorkspace {
 public:
  GridWorkspace(const ExtrapolationGrid& grid, const Basis& basis, const SystemMaps& system,
                const Mat& Q, const Mat& R);
  ExtrapSums evaluate(const Vec& theta_hat, const Vec& Wc, const Vec& Wa, double nu) const;
  int M() const { return static_cast<int>(points_.size()); }

 private:
  struct PointStatics {
    double q = 0.0;  // s^T Q s
    Mat dsA;         // grad_sigma * A
    Vec dsF;         // grad_sigma * F
    Mat D;           // grad_sigma G R^-1 G^T grad_sigma^T
  };
  std::vector<PointStatics> points_;
  int L_ = 0;
};

}  // namespace bastion
