#include "bastion/model.hpp"

#include <cmath>

namespace bastion {

double eval_beta(const BarrierSpec& spec, const Vec& x) {
  const double h = spec.h(x);
  if (!(h > 0.0))
    throw UnsafeStateError(h, "eval_beta: state is outside the safe set (h = " +
                                  std::to_string(h) + ")");
  return spec.K / h;
}

double eval_phi(const BarrierSpec& spec, double beta) {
  if (!(beta > 0.0))
    throw BarrierDomainError("eval_phi: beta must be positive, got " + std::to_string(beta));
  return -(beta * beta) / spec.K;
}

AugState augment(const BarrierSpec& spec, const Vec& x) {
  return AugState{x, eval_beta(spec, x) - spec.beta0};
}

Vec plant_deriv(const PlantModel& model, const Vec& x, const Vec& u) {
  if (x.size() != model.n) throw DimensionError("plant_deriv: state dimension mismatch");
  if (u.size() != model.m) throw DimensionError("plant_deriv: input dimension mismatch");
  if (model.theta_true.size() != model.p)
    throw DimensionError("plant_deriv: theta_true dimension mismatch");
  return model.Y(x) * model.theta_true + model.f(x) + model.g(x) * u;
}

AugMaps aug_maps(const PlantModel& model, const BarrierSpec& spec, const Vec& s) {
  if (s.size() != model.n + 1) throw DimensionError("aug_maps: expected [x; z] of size n + 1");
  const Vec x = s.head(model.n);
  const double z = s[model.n];
  const double beta = z + spec.beta0;
  if (!(beta > 0.0))
    throw BarrierDomainError("aug_maps: z + beta0 must be positive, got " +
                             std::to_string(beta));
  const double phi = eval_phi(spec, beta);
  const Vec gh = spec.grad_h(x);
  if (gh.size() != model.n) throw DimensionError("aug_maps: grad_h dimension mismatch");

  AugMaps maps;
  maps.A = Mat::Zero(model.n + 1, model.p);
  maps.F = Vec::Zero(model.n + 1);
  maps.G = Mat::Zero(model.n + 1, model.m);
  maps.A.topRows(model.n) = model.Y(x);
  maps.F.head(model.n) = model.f(x);
  maps.G.topRows(model.n) = model.g(x);
  maps.A.row(model.n) = phi * (gh.transpose() * maps.A.topRows(model.n));
  maps.F[model.n] = phi * gh.dot(maps.F.head(model.n));
  maps.G.row(model.n) = phi * (gh.transpose() * maps.G.topRows(model.n));
  return maps;
}

SafetyCheck is_safe(const BarrierSpec& spec, const Vec& x) {
  const double h = spec.h(x);
  return SafetyCheck{h > 0.0, h};
}

SystemMaps augmented_system(const PlantModel& model, const BarrierSpec& spec) {
  SystemMaps sys;
  sys.ns = model.n + 1;
  sys.m = model.m;
  sys.p = model.p;
  sys.A = [model, spec](const Vec& s) { return aug_maps(model, spec, s).A; };
  sys.F = [model, spec](const Vec& s) { return aug_maps(model, spec, s).F; };
  sys.G = [model, spec](const Vec& s) { return aug_maps(model, spec, s).G; };
  return sys;
}

SystemMaps plain_system(const PlantModel& model) {
  SystemMaps sys;
  sys.ns = model.n;
  sys.m = model.m;
  sys.p = model.p;
  sys.A = [model](const Vec& x) { return model.Y(x); };
  sys.F = [model](const Vec& x) { return model.f(x); };
  sys.G = [model](const Vec& x) { return model.g(x); };
  return sys;
}

PlantModel make_benchmark_plant(const Vec& theta_true, double theta_bound) {
  if (theta_true.size() != 4)
    throw DimensionError("make_benchmark_plant: theta_true must have 4 entries");
  PlantModel model;
  model.n = 2;
  model.m = 1;
  model.p = 4;
  model.Y = [](const Vec& x) {
    Mat Y = Mat::Zero(2, 4);
    Y(0, 0) = x[0];
    Y(0, 1) = x[1];
    Y(1, 2) = x[0] + x[1];
    Y(1, 3) = x[0] * x[0] * x[1];
    return Y;
  };
  model.f = [](const Vec& x) { return Vec::Zero(x.size()); };
  model.g = [](const Vec& x) {
    Mat g(2, 1);
    g(0, 0) = 0.0;
    g(1, 0) = std::cos(2.0 * x[0]) + 2.0;
    return g;
  };
  model.theta_true = theta_true;
  model.theta_bound = theta_bound;
  return model;
}

PlantModel make_scalar_linear_plant(double a_true, double b, double theta_bound) {
  PlantModel model;
  model.n = 1;
  model.m = 1;
  model.p = 1;
  model.Y = [](const Vec& x) {
    Mat Y(1, 1);
    Y(0, 0) = x[0];
    return Y;
  };
  model.f = [](const Vec& x) { return Vec::Zero(x.size()); };
  model.g = [b](const Vec&) {
    Mat g(1, 1);
    g(0, 0) = b;
    return g;
  };
  model.theta_true = Vec::Constant(1, a_true);
  model.theta_bound = theta_bound;
  return model;
}

BarrierSpec make_circle_barrier(const Vec& center, double radius, double K) {
  if (!(radius > 0.0)) throw Error("make_circle_barrier: radius must be positive");
  if (!(K > 0.0)) throw Error("make_circle_barrier: K must be positive");
  BarrierSpec spec;
  spec.K = K;
  spec.h = [center, radius](const Vec& x) {
    return (x - center).squaredNorm() - radius * radius;
  };
  spec.grad_h = [center](const Vec& x) { return Vec(2.0 * (x - center)); };
  const double h0 = spec.h(Vec::Zero(center.size()));
  if (!(h0 > 0.0))
    throw Error("make_circle_barrier: origin must be inside the safe set (h(0) = " +
                std::to_string(h0) + ")");
  spec.beta0 = K / h0;
  return spec;
}

}  // namespace bastion
