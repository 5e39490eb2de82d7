#include "bastion/adp.hpp"

#include <cmath>

namespace bastion {

namespace {

Mat solve_spd(const Mat& R, const Mat& rhs) {
  Eigen::LLT<Mat> llt(R);
  if (llt.info() != Eigen::Success)
    throw DegenerateGainError("R must be symmetric positive definite");
  return llt.solve(rhs);
}

}  // namespace

Basis make_basis(const std::string& name) {
  Basis b;
  b.name = name;
  if (name == "quadratic-6") {
    b.L = 6;
    b.ns = 3;
    b.sigma = [](const Vec& s) {
      Vec v(6);
      v << s[0] * s[0], s[1] * s[1], s[2] * s[2], s[0] * s[1], s[1] * s[2], s[2] * s[0];
      return v;
    };
    b.grad_sigma = [](const Vec& s) {
      Mat g(6, 3);
      g << 2 * s[0], 0, 0,
           0, 2 * s[1], 0,
           0, 0, 2 * s[2],
           s[1], s[0], 0,
           0, s[2], s[1],
           s[2], 0, s[0];
      return g;
    };
  } else if (name == "quadratic-3") {
    b.L = 3;
    b.ns = 2;
    b.sigma = [](const Vec& s) {
      Vec v(3);
      v << s[0] * s[0], s[1] * s[1], s[0] * s[1];
      return v;
    };
    b.grad_sigma = [](const Vec& s) {
      Mat g(3, 2);
      g << 2 * s[0], 0,
           0, 2 * s[1],
           s[1], s[0];
      return g;
    };
  } else if (name == "quadratic-1") {
    b.L = 1;
    b.ns = 1;
    b.sigma = [](const Vec& s) { return Vec::Constant(1, s[0] * s[0]); };
    b.grad_sigma = [](const Vec& s) { return Mat::Constant(1, 1, 2.0 * s[0]); };
  } else {
    throw Error("make_basis: unknown basis '" + name + "'");
  }
  return b;
}

double critic_value(const Basis& basis, const CriticState& critic, const Vec& s) {
  return critic.Wc.dot(basis.sigma(s));
}

Vec actor_control(const Basis& basis, const ActorState& actor, const Vec& s, const Mat& G,
                  const Mat& R) {
  if (s.size() != basis.ns) throw DimensionError("actor_control: state size mismatch");
  const Mat dsig = basis.grad_sigma(s);
  return -0.5 * solve_spd(R, G.transpose() * (dsig.transpose() * actor.Wa));
}

BellmanEval bellman_error(const Basis& basis, const CriticState& critic,
                          const ActorState& actor, const Vec& s, const Vec& theta_hat,
                          const SystemMaps& system, const Mat& Q, const Mat& R, double nu) {
  if (s.size() != system.ns || s.size() != basis.ns)
    throw DimensionError("bellman_error: state size mismatch");
  if (theta_hat.size() != system.p)
    throw DimensionError("bellman_error: theta_hat size mismatch");
  const Mat A = system.A(s);
  const Vec F = system.F(s);
  const Mat G = system.G(s);
  const Mat dsig = basis.grad_sigma(s);
  const Vec u = actor_control(basis, actor, s, G, R);

  BellmanEval out;
  out.omega = dsig * (A * theta_hat + F + G * u);
  out.delta = s.dot(Q * s) + u.dot(R * u) + critic.Wc.dot(out.omega);
  out.rho = 1.0 + nu * out.omega.squaredNorm();
  const Mat dsigG = dsig * G;
  out.gsigma_wa = dsigG * solve_spd(R, dsigG.transpose() * actor.Wa);
  return out;
}

std::vector<BellmanEval> extrapolated_bellman(const ExtrapolationGrid& grid,
                                              const Basis& basis, const CriticState& critic,
                                              const ActorState& actor, const Vec& theta_hat,
                                              const SystemMaps& system, const Mat& Q,
                                              const Mat& R, double nu) {
  if (grid.points.empty()) throw InsufficientDataError("extrapolated_bellman: empty grid");
  std::vector<BellmanEval> evals;
  evals.reserve(grid.points.size());
  for (const Vec& s : grid.points)
    evals.push_back(bellman_error(basis, critic, actor, s, theta_hat, system, Q, R, nu));
  return evals;
}

ExtrapSums reduce_extrapolation(std::span<const BellmanEval> evals, const Vec& Wc, int L) {
  ExtrapSums sums(L);
  sums.M = static_cast<int>(evals.size());
  for (const auto& e : evals) {
    sums.weighted_delta += (e.delta / e.rho) * e.omega;
    sums.gram += (e.omega * e.omega.transpose()) / (e.rho * e.rho);
    sums.actor_term += (e.omega.dot(Wc) / e.rho) * e.gsigma_wa;
  }
  return sums;
}

Vec critic_deriv(const CriticState& critic, const BellmanEval& on, const ExtrapSums& sums,
                 double k_c1, double k_c2) {
  Vec d = -k_c1 * (on.delta / on.rho) * (critic.Upsilon * on.omega);
  if (sums.M > 0) d -= (k_c2 / sums.M) * (critic.Upsilon * sums.weighted_delta);
  return d;
}

Mat upsilon_deriv(const CriticState& critic, const BellmanEval& on, const ExtrapSums& sums,
                  double beta_c, double k_c1, double k_c2, bool suspend_forgetting) {
  const Mat& U = critic.Upsilon;
  Mat d = suspend_forgetting ? Mat::Zero(U.rows(), U.cols()) : Mat(beta_c * U);
  const Vec Uw = U * on.omega;
  d -= (k_c1 / (on.rho * on.rho)) * (Uw * Uw.transpose());
  if (sums.M > 0) d -= (k_c2 / sums.M) * (U * sums.gram * U);
  return 0.5 * (d + d.transpose());
}

Vec actor_deriv(const ActorState& actor, const CriticState& critic, const BellmanEval& on,
                const ExtrapSums& sums, double k_a1, double k_a2, double k_c1, double k_c2) {
  Vec d = -k_a1 * (actor.Wa - critic.Wc) - k_a2 * actor.Wa;
  d += (k_c1 / (4.0 * on.rho)) * on.omega.dot(critic.Wc) * on.gsigma_wa;
  if (sums.M > 0) d += (k_c2 / (4.0 * sums.M)) * sums.actor_term;
  return d;
}

Vec applied_control(const Basis& basis, const ActorState& actor, const Vec& s,
                    const SystemMaps& system, const Mat& R) {
  return actor_control(basis, actor, s, system.G(s), R);
}

ExtrapolationGrid build_grid(const GridSpec& spec, int dim, const BarrierSpec* barrier) {
  if (spec.count < 1) throw ConfigError("adp.grid.count", "grid count must be >= 1");
  if (dim < 1 || dim > 3) throw ConfigError("adp.grid", "grid dimension must be 1, 2, or 3");
  if (dim == 3 && !(spec.z_max >= spec.z_min))
    throw ConfigError("adp.grid.z_max", "grid z-range is empty");

  const auto in_domain = [&](const Vec& s) {
    return barrier == nullptr || dim != 3 || s[2] + barrier->beta0 > 0.0;
  };

  ExtrapolationGrid grid;
  if (spec.count == 1) {
    Vec center = Vec::Zero(dim);
    if (dim == 3) center[2] = 0.5 * (spec.z_min + spec.z_max);
    if (!in_domain(center))
      throw ConfigError("adp.grid", "grid center is outside the barrier domain");
    grid.points.push_back(center);
    return grid;
  }

  constexpr unsigned kPrimes[3] = {2, 3, 5};
  const int x_dims = dim == 3 ? 2 : dim;
  unsigned long long index = 1 + spec.seed * static_cast<unsigned long long>(spec.count);
  const unsigned long long budget = 1000ULL * static_cast<unsigned long long>(spec.count);
  for (unsigned long long attempt = 0;
       attempt < budget && grid.points.size() < static_cast<size_t>(spec.count);
       ++attempt, ++index) {
    Vec s = Vec::Zero(dim);
    for (int d = 0; d < x_dims; ++d)
      s[d] = -spec.half_width + 2.0 * spec.half_width * radical_inverse(kPrimes[d], index);
    if (dim == 3)
      s[2] = spec.z_min + (spec.z_max - spec.z_min) * radical_inverse(kPrimes[2], index);
    if (in_domain(s)) grid.points.push_back(std::move(s));
  }
  if (grid.points.size() < static_cast<size_t>(spec.count))
    throw ConfigError("adp.grid",
                      "only " + std::to_string(grid.points.size()) + " of " +
                          std::to_string(spec.count) +
                          " grid points survive the barrier-domain filter");
  return grid;
}

GridWorkspace::GridWorkspace(const ExtrapolationGrid& grid, const Basis& basis,
                             const SystemMaps& system, const Mat& Q, const Mat& R)
    : L_(basis.L) {
  points_.reserve(grid.points.size());
  for (const Vec& s : grid.points) {
    PointStatics pt;
    const Mat dsig = basis.grad_sigma(s);
    const Mat G = system.G(s);
    const Mat dsigG = dsig * G;
    pt.q = s.dot(Q * s);
    pt.dsA = dsig * system.A(s);
    pt.dsF = dsig * system.F(s);
    pt.D = dsigG * solve_spd(R, dsigG.transpose());
    points_.push_back(std::move(pt));
  }
}

ExtrapSums GridWorkspace::evaluate(const Vec& theta_hat, const Vec& Wc, const Vec& Wa,
                                   double nu) const {
  ExtrapSums sums(L_);
  sums.M = static_cast<int>(points_.size());
  Vec dw(L_), omega(L_), scaled(L_);
  for (const auto& pt : points_) {
    dw.noalias() = pt.D * Wa;
    omega.noalias() = pt.dsA * theta_hat;
    omega += pt.dsF;
    omega -= 0.5 * dw;
    const double delta = pt.q + 0.25 * Wa.dot(dw) + Wc.dot(omega);
    const double rho = 1.0 + nu * omega.squaredNorm();
    sums.weighted_delta += (delta / rho) * omega;
    scaled = omega / rho;
    sums.gram.noalias() += scaled * scaled.transpose();
    sums.actor_term += (omega.dot(Wc) / rho) * dw;
  }
  return sums;
}

}  // namespace bastion
