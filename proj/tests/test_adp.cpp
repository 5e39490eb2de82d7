#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "bastion/adp.hpp"
#include "bastion/errors.hpp"
#include "bastion/model.hpp"
#include "bastion/numerics.hpp"
#include "bastion/sim.hpp"

using namespace bastion;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Vec v3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

Vec theta_case() {
  Vec th(4);
  th << -1.0, -1.0, -0.5, -0.5;
  return th;
}

BarrierSpec case_barrier() { return make_circle_barrier(v2(1.0, 2.0), 0.5, 0.01); }

BellmanEval scalar_eval(double delta, double omega, double rho, double gsig_wa) {
  BellmanEval e;
  e.delta = delta;
  e.omega = Vec::Constant(1, omega);
  e.rho = rho;
  e.gsigma_wa = Vec::Constant(1, gsig_wa);
  return e;
}

}  // namespace

TEST_CASE("quadratic bases vanish at zero and match finite-difference gradients") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  for (const auto& [name, ns, L] :
       {std::tuple{std::string("quadratic-6"), 3, 6}, {std::string("quadratic-3"), 2, 3},
        {std::string("quadratic-1"), 1, 1}}) {
    const Basis basis = make_basis(name);
    CHECK(basis.L == L);
    CHECK(basis.ns == ns);
    CHECK(basis.sigma(Vec::Zero(ns)).norm() == 0.0);
    CHECK(basis.grad_sigma(Vec::Zero(ns)).norm() == 0.0);

    for (int trial = 0; trial < 100; ++trial) {
      Vec s(ns);
      for (int i = 0; i < ns; ++i) s[i] = unif(rng);
      const Mat g = basis.grad_sigma(s);
      REQUIRE(g.rows() == L);
      REQUIRE(g.cols() == ns);
      const double step = 1e-6;
      for (int j = 0; j < ns; ++j) {
        Vec sp = s, sm = s;
        sp[j] += step;
        sm[j] -= step;
        const Vec fd = (basis.sigma(sp) - basis.sigma(sm)) / (2.0 * step);
        for (int i = 0; i < L; ++i) {
          const double denom = std::max(1.0, std::abs(g(i, j)));
          CHECK(std::abs(fd[i] - g(i, j)) / denom < 1e-6);
        }
      }
    }
  }
  CHECK_THROWS_AS(make_basis("cubic-9"), Error);
}

TEST_CASE("critic value") {
  const Basis basis = make_basis("quadratic-6");
  CriticState critic;
  critic.Wc = Vec::Zero(6);
  critic.Upsilon = Mat::Identity(6, 6);
  CHECK(critic_value(basis, critic, v3(1.3, -0.4, 0.02)) == 0.0);

  critic.Wc = Vec::Constant(6, 0.5);
  CHECK(critic_value(basis, critic, v3(1.0, 0.0, 0.0)) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(critic_value(basis, critic, Vec::Zero(3)) == 0.0);
}

TEST_CASE("actor control") {
  const Basis basis = make_basis("quadratic-6");
  const Mat R = Mat::Identity(1, 1);
  Mat G(3, 1);
  G << 0.0, 2.7, -0.01;

  ActorState actor;
  actor.Wa = Vec::Zero(6);
  CHECK(actor_control(basis, actor, v3(1.0, 2.0, 0.05), G, R).norm() == 0.0);

  actor.Wa = Vec::Constant(6, 0.5);
  CHECK(actor_control(basis, actor, Vec::Zero(3), G, R).norm() == 0.0);

  const Vec s = v3(0.7, -1.1, 0.03);
  const Vec u1 = actor_control(basis, actor, s, G, R);
  const Vec u2 = actor_control(basis, actor, s, G, 2.0 * R);
  CHECK((u2 - 0.5 * u1).cwiseAbs().maxCoeff() < 1e-15);

  CHECK_THROWS_AS(actor_control(basis, actor, s, G, Mat::Zero(1, 1)), DegenerateGainError);
}

TEST_CASE("bellman error: vanishing case, normalization bound, Riccati fixed point") {
  const PlantModel plant = make_benchmark_plant(theta_case(), 2.0);
  const BarrierSpec barrier = case_barrier();
  const SystemMaps aug = augmented_system(plant, barrier);
  const Basis basis = make_basis("quadratic-6");
  const Mat Q = Mat::Identity(3, 3);
  const Mat R = Mat::Identity(1, 1);
  const double nu = 2.0;

  CriticState critic;
  critic.Wc = Vec::Zero(6);
  critic.Upsilon = Mat::Identity(6, 6);
  ActorState actor;
  actor.Wa = Vec::Zero(6);

  const BellmanEval at0 = bellman_error(basis, critic, actor, Vec::Zero(3), Vec::Zero(4),
                                        aug, Q, R, nu);
  CHECK(at0.delta == 0.0);
  CHECK(at0.omega.norm() == 0.0);
  CHECK(at0.rho == doctest::Approx(1.0).epsilon(1e-15));

  // rho >= 1 and |omega/rho| <= 1/(2 sqrt(nu)) at random states and weights.
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  int tested = 0;
  while (tested < 200) {
    const Vec x = v2(unif(rng), unif(rng));
    if (barrier.h(x) <= 1e-3) continue;
    Vec s(3);
    s << x[0], x[1], augment(barrier, x).z;
    for (int i = 0; i < 6; ++i) {
      critic.Wc[i] = unif(rng);
      actor.Wa[i] = unif(rng);
    }
    Vec th(4);
    for (int i = 0; i < 4; ++i) th[i] = unif(rng);
    const BellmanEval e = bellman_error(basis, critic, actor, s, th, aug, Q, R, nu);
    CHECK(e.rho >= 1.0);
    CHECK((e.omega / e.rho).norm() <= 1.0 / (2.0 * std::sqrt(nu)) + 1e-12);
    CHECK(all_finite(e.omega));
    CHECK(std::isfinite(e.delta));
    ++tested;
  }

  // Scalar linear-quadratic fixed point: with both weight vectors at the
  // closed-form Riccati value the Bellman residual vanishes.
  const double a = -1.0, b = 1.0, q = 1.0, r = 1.0;
  const PlantModel scalar = make_scalar_linear_plant(a, b, 2.0);
  const SystemMaps plain = plain_system(scalar);
  const Basis b1 = make_basis("quadratic-1");
  const double pstar = scalar_are_solution(a, b, q, r);
  CHECK(pstar == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-12));
  CriticState lc;
  lc.Wc = Vec::Constant(1, pstar);
  lc.Upsilon = Mat::Identity(1, 1);
  ActorState la;
  la.Wa = Vec::Constant(1, pstar);
  for (double x : {-2.0, -0.5, 0.3, 1.7}) {
    const BellmanEval e = bellman_error(b1, lc, la, Vec::Constant(1, x),
                                        Vec::Constant(1, a), plain,
                                        Mat::Constant(1, 1, q), Mat::Constant(1, 1, r), 1.0);
    CHECK(std::abs(e.delta) < 1e-8);
  }
}

TEST_CASE("extrapolated bellman: zero weights, singleton grid, reduction sums") {
  const PlantModel plant = make_benchmark_plant(theta_case(), 2.0);
  const BarrierSpec barrier = case_barrier();
  const SystemMaps aug = augmented_system(plant, barrier);
  const Basis basis = make_basis("quadratic-6");
  const Mat Q = Mat::Identity(3, 3);
  const Mat R = Mat::Identity(1, 1);

  GridSpec gs;
  gs.count = 16;
  const ExtrapolationGrid grid = build_grid(gs, 3, &barrier);
  REQUIRE(grid.M() == 16);

  CriticState critic;
  critic.Wc = Vec::Zero(6);
  critic.Upsilon = Mat::Identity(6, 6);
  ActorState actor;
  actor.Wa = Vec::Zero(6);

  // All weights zero: only the state cost survives in each delta_k.
  const auto evals = extrapolated_bellman(grid, basis, critic, actor, Vec::Zero(4), aug, Q,
                                          R, 2.0);
  REQUIRE(evals.size() == 16);
  for (int k = 0; k < 16; ++k) {
    const Vec& sk = grid.points[k];
    CHECK(evals[k].delta == doctest::Approx(sk.dot(Q * sk)).epsilon(1e-12));
    CHECK(evals[k].delta >= 0.0);
  }

  // Singleton grid equals a direct evaluation at that point.
  critic.Wc = Vec::Constant(6, 0.4);
  actor.Wa = Vec::Constant(6, 0.6);
  Vec th(4);
  th << -0.8, -1.1, -0.4, -0.6;
  ExtrapolationGrid one;
  one.points.push_back(grid.points[3]);
  const auto single = extrapolated_bellman(one, basis, critic, actor, th, aug, Q, R, 2.0);
  const BellmanEval direct = bellman_error(basis, critic, actor, grid.points[3], th, aug, Q,
                                           R, 2.0);
  REQUIRE(single.size() == 1);
  CHECK(single[0].delta == direct.delta);
  CHECK((single[0].omega - direct.omega).norm() == 0.0);
  CHECK(single[0].rho == direct.rho);

  // Reduction of a singleton matches the closed forms.
  const ExtrapSums sums = reduce_extrapolation(single, critic.Wc, basis.L);
  CHECK(sums.M == 1);
  CHECK((sums.weighted_delta - direct.omega / direct.rho * direct.delta).norm() < 1e-14);
  CHECK((sums.gram - direct.omega * direct.omega.transpose() / (direct.rho * direct.rho))
            .cwiseAbs()
            .maxCoeff() < 1e-14);
  const Vec expect_actor = direct.gsigma_wa * direct.omega.dot(critic.Wc) / direct.rho;
  CHECK((sums.actor_term - expect_actor).norm() < 1e-12);

  // The excitation statistic of the full grid is nonnegative and finite.
  const auto all_sums = reduce_extrapolation(evals, critic.Wc, basis.L);
  const double lam = sym_min_eig(all_sums.gram / all_sums.M);
  CHECK(lam >= -1e-12);
  CHECK(std::isfinite(lam));
  CHECK_THROWS_AS(extrapolated_bellman(ExtrapolationGrid{}, basis, critic, actor, th, aug,
                                       Q, R, 2.0),
                  InsufficientDataError);
}

TEST_CASE("critic update law") {
  CriticState critic;
  critic.Wc = Vec::Constant(1, 0.7);
  critic.Upsilon = Mat::Constant(1, 1, 1.0);

  // Zero residuals everywhere is a fixed point (exactly zero derivative).
  const Vec fixed = critic_deriv(critic, scalar_eval(0.0, 3.0, 2.0, 0.0), ExtrapSums(1),
                                 1.0, 1.0);
  CHECK(fixed.norm() == 0.0);

  // Upsilon=1, omega=rho=1, delta=2, k_c1=1, no extrapolation -> -2.
  const Vec d = critic_deriv(critic, scalar_eval(2.0, 1.0, 1.0, 0.0), ExtrapSums(1), 1.0,
                             1.0);
  CHECK(d[0] == doctest::Approx(-2.0).epsilon(1e-15));

  // k_c2 = 0 gates out the grid contribution entirely.
  ExtrapSums sums(1);
  sums.M = 4;
  sums.weighted_delta = Vec::Constant(1, 10.0);
  sums.gram = Mat::Constant(1, 1, 10.0);
  const Vec gated = critic_deriv(critic, scalar_eval(2.0, 1.0, 1.0, 0.0), sums, 1.0, 0.0);
  CHECK(gated[0] == doctest::Approx(-2.0).epsilon(1e-15));

  // Grid term: -(k_c2/M) Upsilon sum = -(3/4)*1*10 on top of the -2.
  const Vec both = critic_deriv(critic, scalar_eval(2.0, 1.0, 1.0, 0.0), sums, 1.0, 3.0);
  CHECK(both[0] == doctest::Approx(-2.0 - 7.5).epsilon(1e-14));
}

TEST_CASE("least-squares gain update law") {
  CriticState critic;
  critic.Wc = Vec::Zero(1);
  critic.Upsilon = Mat::Constant(1, 1, 2.0);

  // omega = 0 with no grid contribution: pure forgetting growth beta_c * Upsilon.
  const Mat grow = upsilon_deriv(critic, scalar_eval(0.0, 0.0, 1.0, 0.0), ExtrapSums(1),
                                 0.1, 1.0, 1.0);
  CHECK(grow(0, 0) == doctest::Approx(0.2).epsilon(1e-15));

  // Upsilon=2, beta_c=0.1, k_c1=1, omega=rho=1: 0.2 - 4 = -3.8.
  const Mat d = upsilon_deriv(critic, scalar_eval(0.0, 1.0, 1.0, 0.0), ExtrapSums(1), 0.1,
                              1.0, 1.0);
  CHECK(d(0, 0) == doctest::Approx(-3.8).epsilon(1e-15));

  // Suspending the forgetting term drops only beta_c * Upsilon.
  const Mat susp = upsilon_deriv(critic, scalar_eval(0.0, 1.0, 1.0, 0.0), ExtrapSums(1),
                                 0.1, 1.0, 1.0, true);
  CHECK(susp(0, 0) == doctest::Approx(-4.0).epsilon(1e-15));

  // Symmetry of the full law on a random PD Upsilon.
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  CriticState big;
  big.Wc = Vec::Zero(3);
  Mat B(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) B(i, j) = unif(rng);
  big.Upsilon = B.transpose() * B + 0.3 * Mat::Identity(3, 3);
  BellmanEval on;
  on.delta = 0.5;
  on.omega = Vec::LinSpaced(3, -1.0, 1.0);
  on.rho = 1.7;
  on.gsigma_wa = Vec::Zero(3);
  ExtrapSums sums(3);
  sums.M = 2;
  Mat C(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) C(i, j) = unif(rng);
  sums.gram = C.transpose() * C;
  const Mat full = upsilon_deriv(big, on, sums, 0.1, 1.0, 1.0);
  CHECK((full - full.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("actor update law") {
  ActorState actor;
  CriticState critic;
  critic.Upsilon = Mat::Identity(1, 1);

  // Everything zero -> zero.
  actor.Wa = Vec::Zero(1);
  critic.Wc = Vec::Zero(1);
  CHECK(actor_deriv(actor, critic, scalar_eval(0.0, 1.0, 1.0, 0.0), ExtrapSums(1), 2.0,
                    1.0, 1.0, 1.0)
            .norm() == 0.0);

  // Consensus fixed point: Wa = Wc, k_a2 = 0, no G-sigma coupling.
  actor.Wa = Vec::Constant(1, 0.8);
  critic.Wc = Vec::Constant(1, 0.8);
  CHECK(actor_deriv(actor, critic, scalar_eval(0.3, 1.0, 1.0, 0.0), ExtrapSums(1), 2.0,
                    0.0, 1.0, 1.0)
            .norm() == doctest::Approx(0.0).epsilon(1e-15));

  // k_a1=2, k_a2=1, Wa=1, Wc=0, G-sigma terms zero -> -2(1-0) - 1 = -3.
  actor.Wa = Vec::Constant(1, 1.0);
  critic.Wc = Vec::Zero(1);
  const Vec d = actor_deriv(actor, critic, scalar_eval(0.0, 1.0, 1.0, 0.0), ExtrapSums(1),
                            2.0, 1.0, 1.0, 1.0);
  CHECK(d[0] == doctest::Approx(-3.0).epsilon(1e-15));

  // On-trajectory coupling term: (k_c1/(4 rho)) gsigma_wa (omega . Wc).
  actor.Wa = Vec::Constant(1, 1.0);
  critic.Wc = Vec::Constant(1, 3.0);
  const Vec c = actor_deriv(actor, critic, scalar_eval(0.0, 2.0, 2.0, 5.0), ExtrapSums(1),
                            0.0, 0.0, 1.0, 0.0);
  CHECK(c[0] == doctest::Approx(5.0 * 6.0 / 8.0).epsilon(1e-14));

  // Grid coupling term: (k_c2/(4M)) * actor_term.
  ExtrapSums sums(1);
  sums.M = 2;
  sums.actor_term = Vec::Constant(1, 8.0);
  const Vec g = actor_deriv(actor, critic, scalar_eval(0.0, 0.0, 1.0, 0.0), sums, 0.0, 0.0,
                            1.0, 3.0);
  CHECK(g[0] == doctest::Approx(3.0 / (4.0 * 2.0) * 8.0).epsilon(1e-14));
}

TEST_CASE("applied control equals the actor policy and is finite at the start state") {
  const PlantModel plant = make_benchmark_plant(theta_case(), 2.0);
  const BarrierSpec barrier = case_barrier();
  const SystemMaps aug = augmented_system(plant, barrier);
  const Basis basis = make_basis("quadratic-6");
  const Mat R = Mat::Identity(1, 1);

  ActorState actor;
  actor.Wa = Vec::Constant(6, 0.5);
  const Vec x0 = v2(2.5, 4.0);
  Vec s(3);
  s << x0[0], x0[1], augment(barrier, x0).z;

  const Vec u = applied_control(basis, actor, s, aug, R);
  const Vec u_ref = actor_control(basis, actor, s, aug.G(s), R);
  CHECK(u.size() == 1);
  CHECK(u[0] == u_ref[0]);  // bit-for-bit
  CHECK(all_finite(u));
}

TEST_CASE("extrapolation grid construction") {
  const BarrierSpec barrier = case_barrier();

  GridSpec one;
  one.count = 1;
  const ExtrapolationGrid g1 = build_grid(one, 3, &barrier);
  REQUIRE(g1.M() == 1);
  CHECK(g1.points[0][0] == 0.0);
  CHECK(g1.points[0][1] == 0.0);
  CHECK(g1.points[0][2] == doctest::Approx(0.05).epsilon(1e-15));

  GridSpec full;
  full.count = 100;
  const ExtrapolationGrid g100 = build_grid(full, 3, &barrier);
  REQUIRE(g100.M() == 100);
  for (const Vec& p : g100.points) {
    CHECK(p.size() == 3);
    CHECK(std::abs(p[0]) <= 2.0);
    CHECK(std::abs(p[1]) <= 2.0);
    CHECK(p[2] >= 0.0);
    CHECK(p[2] <= 0.1);
    CHECK(p[2] + barrier.beta0 > 0.0);
  }

  // Rebuild determinism: identical layout bit-for-bit.
  const ExtrapolationGrid again = build_grid(full, 3, &barrier);
  REQUIRE(again.M() == g100.M());
  for (int k = 0; k < g100.M(); ++k)
    CHECK((again.points[k] - g100.points[k]).cwiseAbs().maxCoeff() == 0.0);

  // Two-dimensional grid for the unaugmented plant.
  GridSpec plane;
  plane.count = 50;
  const ExtrapolationGrid g2 = build_grid(plane, 2, nullptr);
  REQUIRE(g2.M() == 50);
  for (const Vec& p : g2.points) CHECK(p.size() == 2);

  GridSpec bad;
  bad.count = 0;
  CHECK_THROWS_AS(build_grid(bad, 3, &barrier), ConfigError);
}

TEST_CASE("grid workspace reproduces the direct extrapolation reduction") {
  const PlantModel plant = make_benchmark_plant(theta_case(), 2.0);
  const BarrierSpec barrier = case_barrier();
  const SystemMaps aug = augmented_system(plant, barrier);
  const Basis basis = make_basis("quadratic-6");
  const Mat Q = Mat::Identity(3, 3);
  const Mat R = Mat::Identity(1, 1);
  const double nu = 2.0;

  GridSpec gs;
  gs.count = 25;
  const ExtrapolationGrid grid = build_grid(gs, 3, &barrier);
  const GridWorkspace ws(grid, basis, aug, Q, R);
  CHECK(ws.M() == 25);

  std::mt19937 rng(31);
  std::uniform_real_distribution<double> unif(-1.5, 1.5);
  for (int trial = 0; trial < 20; ++trial) {
    CriticState critic;
    critic.Wc = Vec::NullaryExpr(6, [&](int) { return unif(rng); });
    critic.Upsilon = Mat::Identity(6, 6);
    ActorState actor;
    actor.Wa = Vec::NullaryExpr(6, [&](int) { return unif(rng); });
    Vec th(4);
    for (int i = 0; i < 4; ++i) th[i] = unif(rng);

    const auto evals = extrapolated_bellman(grid, basis, critic, actor, th, aug, Q, R, nu);
    const ExtrapSums direct = reduce_extrapolation(evals, critic.Wc, basis.L);
    const ExtrapSums fast = ws.evaluate(th, critic.Wc, actor.Wa, nu);
    CHECK(fast.M == direct.M);
    CHECK((fast.weighted_delta - direct.weighted_delta).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((fast.gram - direct.gram).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((fast.actor_term - direct.actor_term).cwiseAbs().maxCoeff() < 1e-10);
  }
}
