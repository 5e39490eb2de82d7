#pragma once

/// @file model.hpp
/// Control-affine plant description, inverse-barrier safety embedding, and
/// the augmented-system maps the learning stack runs on.
///
/// Plant:    x' = Y(x) theta + f(x) + g(x) u,  with f(0) = 0, Y(0) = 0.
/// Barrier:  B(a) = K / a over the safe set {h(x) > 0}; beta(x) = B(h(x));
///           the barrier state z = beta(x) - beta(0) satisfies
///           z' = Phi(z + beta0) * grad_h(x) * x'  with Phi(b) = -b^2 / K.
/// Augmented state s = [x; z], so s' = A(s) theta + F(s) + G(s) u.

#include <functional>

#include "bastion/numerics.hpp"

namespace bastion {

struct PlantModel {
  int n = 0;  // state dimension
  int m = 0;  // input dimension
  int p = 0;  // unknown-parameter dimension
  std::function<Mat(const Vec&)> Y;  // n x p regressor, Y(0) = 0
  std::function<Vec(const Vec&)> f;  // known drift, f(0) = 0
  std::function<Mat(const Vec&)> g;  // n x m input map, nonsingular norm
  Vec theta_true;                    // ground truth, used by the simulator only
  double theta_bound = 0.0;          // known bound on |theta|
};

struct BarrierSpec {
  double K = 1.0;
  std::function<double(const Vec&)> h;       // safety function, safe set {h > 0}
  std::function<Vec(const Vec&)> grad_h;     // dh/dx as a column vector
  double beta0 = 0.0;                        // beta(0) = K / h(0)
};

/// State of the safety-embedded system: plant state plus barrier state.
struct AugState {
  Vec x;
  double z = 0.0;
};

/// Augmented-dynamics maps evaluated at one state s = [x; z].
struct AugMaps {
  Mat A;  // (n+1) x p
  Vec F;  // (n+1)
  Mat G;  // (n+1) x m
};

struct SafetyCheck {
  bool safe = false;
  double margin = 0.0;  // h(x); positive inside the safe set
};

/// beta(x) = K / h(x). Throws UnsafeStateError (carrying h) when h(x) <= 0.
double eval_beta(const BarrierSpec& spec, const Vec& x);

/// Phi(beta) = -beta^2 / K, the barrier chain-rule factor expressed in the
/// barrier value itself (equals -K / h^2 at beta = K / h).
/// Throws BarrierDomainError when beta <= 0.
double eval_phi(const BarrierSpec& spec, double beta);

/// Lift a plant state onto the barrier cone: z = beta(x) - beta0.
AugState augment(const BarrierSpec& spec, const Vec& x);

/// True plant derivative Y(x) theta_true + f(x) + g(x) u.
Vec plant_deriv(const PlantModel& model, const Vec& x, const Vec& u);

/// A, F, G of the augmented dynamics at s = [x; z]. The bottom row scales the
/// plant maps by Phi(z + beta0) * grad_h(x); requires z + beta0 > 0.
AugMaps aug_maps(const PlantModel& model, const BarrierSpec& spec, const Vec& s);

SafetyCheck is_safe(const BarrierSpec& spec, const Vec& x);

/// Generic state-space maps the learning laws consume; either the augmented
/// system over s = [x; z] or the bare plant over s = x.
struct SystemMaps {
  int ns = 0;
  int m = 0;
  int p = 0;
  std::function<Mat(const Vec&)> A;
  std::function<Vec(const Vec&)> F;
  std::function<Mat(const Vec&)> G;
};

SystemMaps augmented_system(const PlantModel& model, const BarrierSpec& spec);
SystemMaps plain_system(const PlantModel& model);

/// Two-state benchmark plant: Y(x) = [[x1, x2, 0, 0], [0, 0, x1 + x2, x1^2 x2]],
/// f = 0, g(x) = [0, cos(2 x1) + 2]^T.
PlantModel make_benchmark_plant(const Vec& theta_true, double theta_bound);

/// Scalar plant x' = a x + b u written as Y(x) = [x], theta = [a], g = [b].
PlantModel make_scalar_linear_plant(double a_true, double b, double theta_bound);

/// Circular keep-out zone h(x) = |x - center|^2 - radius^2 with B(a) = K / a.
/// Requires the origin to be safe (h(0) > 0) so beta0 is defined.
BarrierSpec make_circle_barrier(const Vec& center, double radius, double K);

}  // namespace bastion
