#include "bastion/sim.hpp"

#include <cmath>
#include <limits>

namespace bastion {

namespace {

Vec assemble_s(const SimContext& ctx, const FullState& st) {
  if (!ctx.barrier.has_value()) return st.x;
  Vec s(ctx.ns);
  s.head(ctx.model.n) = st.x;
  s[ctx.model.n] = st.z;
  return s;
}

}  // namespace

SimContext make_context(const ScenarioConfig& cfg) {
  SimContext ctx;
  ctx.cfg = cfg;

  if (cfg.plant == PlantKind::Benchmark) {
    ctx.model = make_benchmark_plant(cfg.theta_true, cfg.theta_bound);
  } else {
    if (cfg.theta_true.size() != 1)
      throw ConfigError("model.theta_true", "scalar-linear plant takes one parameter");
    ctx.model = make_scalar_linear_plant(cfg.theta_true[0], cfg.input_gain_b, cfg.theta_bound);
  }

  if (cfg.mode == Mode::BasRl) {
    if (!cfg.constraint.has_value())
      throw ConfigError("constraint", "bas-rl mode needs a constraint");
    ctx.barrier =
        make_circle_barrier(cfg.constraint->center, cfg.constraint->radius, cfg.barrier_K);
  }

  ctx.basis = make_basis(cfg.adp.basis);
  ctx.system = ctx.barrier.has_value() ? augmented_system(ctx.model, *ctx.barrier)
                                       : plain_system(ctx.model);
  ctx.ns = ctx.system.ns;
  if (ctx.basis.ns != ctx.ns)
    throw ConfigError("adp.basis", "basis '" + cfg.adp.basis + "' expects dimension " +
                                       std::to_string(ctx.basis.ns) + ", system has " +
                                       std::to_string(ctx.ns));
  if (cfg.Q.rows() != ctx.ns || cfg.Q.cols() != ctx.ns)
    throw ConfigError("cost.Q", "Q must be " + std::to_string(ctx.ns) + "x" +
                                    std::to_string(ctx.ns) + " for this mode");
  if (cfg.R.rows() != ctx.model.m || cfg.R.cols() != ctx.model.m)
    throw ConfigError("cost.R", "R must match the input dimension");
  if (cfg.x0.size() != ctx.model.n) throw ConfigError("x0", "x0 must match the plant dimension");
  if (cfg.estimator.theta_hat0.size() != ctx.model.p)
    throw ConfigError("estimator.theta_hat0", "wrong parameter dimension");
  if (cfg.estimator.Gamma0.rows() != ctx.model.p || cfg.estimator.Gamma0.cols() != ctx.model.p)
    throw ConfigError("estimator.gamma0", "wrong gain dimension");
  if (cfg.adp.Wc0.size() != ctx.basis.L || cfg.adp.Wa0.size() != ctx.basis.L)
    throw ConfigError("adp.wc0", "weights must match the basis feature count");
  if (cfg.adp.Upsilon0.rows() != ctx.basis.L || cfg.adp.Upsilon0.cols() != ctx.basis.L)
    throw ConfigError("adp.upsilon0", "wrong gain dimension");

  ctx.grid = build_grid(cfg.adp.grid, ctx.ns, ctx.barrier.has_value() ? &*ctx.barrier : nullptr);
  ctx.grid_ws = std::make_shared<GridWorkspace>(ctx.grid, ctx.basis, ctx.system, cfg.Q, cfg.R);
  return ctx;
}

int bundle_size(const SimContext& ctx) {
  const int n = ctx.model.n, p = ctx.model.p, L = ctx.basis.L;
  return n + (ctx.barrier.has_value() ? 2 : 0) + p + p * p + L + L * L + L;
}

Vec pack_bundle(const SimContext& ctx, const FullState& st) {
  const int n = ctx.model.n, p = ctx.model.p, L = ctx.basis.L;
  Vec y(bundle_size(ctx));
  int o = 0;
  y.segment(o, n) = st.x;
  o += n;
  if (ctx.barrier.has_value()) {
    y[o++] = st.z;
    y[o++] = st.zhat;
  }
  y.segment(o, p) = st.theta_hat;
  o += p;
  y.segment(o, p * p) = Eigen::Map<const Vec>(st.Gamma.data(), p * p);
  o += p * p;
  y.segment(o, L) = st.Wc;
  o += L;
  y.segment(o, L * L) = Eigen::Map<const Vec>(st.Upsilon.data(), L * L);
  o += L * L;
  y.segment(o, L) = st.Wa;
  return y;
}

FullState unpack_bundle(const SimContext& ctx, const Vec& y) {
  const int n = ctx.model.n, p = ctx.model.p, L = ctx.basis.L;
  FullState st;
  int o = 0;
  st.x = y.segment(o, n);
  o += n;
  if (ctx.barrier.has_value()) {
    st.z = y[o++];
    st.zhat = y[o++];
  }
  st.theta_hat = y.segment(o, p);
  o += p;
  st.Gamma = Eigen::Map<const Mat>(y.data() + o, p, p);
  o += p * p;
  st.Wc = y.segment(o, L);
  o += L;
  st.Upsilon = Eigen::Map<const Mat>(y.data() + o, L, L);
  o += L * L;
  st.Wa = y.segment(o, L);
  return st;
}

FullState closed_loop_deriv(const SimContext& ctx, const HistoryStack& stack,
                            const FullState& st, double t, bool suspend_forgetting,
                            StepAux* aux) {
  const ScenarioConfig& cfg = ctx.cfg;
  const bool bas = ctx.barrier.has_value();
  const Vec s = assemble_s(ctx, st);

  if (bas) {
    const double h = ctx.barrier->h(st.x);
    if (!(h > 0.0))
      throw SafetyViolationError(t, h, "closed_loop_deriv: state left the safe set");
  }

  const ActorState actor{st.Wa};
  const CriticState critic{st.Wc, st.Upsilon};
  const EstimatorState est{st.theta_hat, st.Gamma, st.zhat};

  const Vec u = applied_control(ctx.basis, actor, s, ctx.system, cfg.R);
  const Vec xdot = plant_deriv(ctx.model, st.x, u);

  FullState d;
  d.x = xdot;
  const BarrierSpec* bp = bas ? &*ctx.barrier : nullptr;
  if (bas) {
    const double phi_gain = eval_phi(*ctx.barrier, st.z + ctx.barrier->beta0);
    d.z = phi_gain * ctx.barrier->grad_h(st.x).dot(xdot);
    d.zhat = observer_deriv(est, st.x, st.z, u, ctx.model, *ctx.barrier, cfg.observer.gamma);
  } else {
    d.z = 0.0;
    d.zhat = 0.0;
  }

  const Vec phi = icl_phi(est, stack, ctx.model, bp, st.x, st.z, cfg.estimator.k_theta);
  d.theta_hat = project(st.theta_hat, st.Gamma * phi, st.Gamma, ctx.model.theta_bound);
  d.Gamma = gamma_deriv(est, stack, phi, cfg.estimator.beta_theta, cfg.estimator.k_theta,
                        ctx.model.theta_bound);

  const BellmanEval on =
      bellman_error(ctx.basis, critic, actor, s, st.theta_hat, ctx.system, cfg.Q, cfg.R,
                    cfg.adp.nu);
  const ExtrapSums sums = ctx.grid_ws->evaluate(st.theta_hat, st.Wc, st.Wa, cfg.adp.nu);
  d.Wc = critic_deriv(critic, on, sums, cfg.adp.k_c1, cfg.adp.k_c2);
  d.Upsilon = upsilon_deriv(critic, on, sums, cfg.adp.beta_c, cfg.adp.k_c1, cfg.adp.k_c2,
                            suspend_forgetting);
  d.Wa = actor_deriv(actor, critic, on, sums, cfg.adp.k_a1, cfg.adp.k_a2, cfg.adp.k_c1,
                     cfg.adp.k_c2);

  if (aux != nullptr) {
    aux->u = u;
    aux->delta = on.delta;
    aux->omega_over_rho = on.omega.norm() / on.rho;
    aux->h = bas ? ctx.barrier->h(st.x) : 0.0;
    aux->grid_gram = sums.gram;
  }
  return d;
}

RunResult run_scenario(const ScenarioConfig& cfg) {
  SimContext ctx = make_context(cfg);
  const ScenarioConfig& c = ctx.cfg;
  const bool bas = ctx.barrier.has_value();
  const int L = ctx.basis.L;

  // h is monitored against the configured constraint in both modes so the
  // no-safety baseline still reports obstacle incursions.
  std::function<double(const Vec&)> h_monitor;
  if (bas) {
    h_monitor = ctx.barrier->h;
  } else if (c.constraint.has_value()) {
    const Vec center = c.constraint->center;
    const double radius = c.constraint->radius;
    h_monitor = [center, radius](const Vec& x) {
      return (x - center).squaredNorm() - radius * radius;
    };
  }

  RunResult result;
  result.config = c;

  HistoryStack stack(c.estimator.stack_capacity, c.estimator.delta_admission,
                     c.estimator.kappa, ctx.model.p);
  TrajectoryBuffer buffer(c.estimator.window);

  FullState st;
  st.x = c.x0;
  if (bas) {
    st.z = augment(*ctx.barrier, c.x0).z;
    st.zhat = c.observer.z_hat0;
  }
  st.theta_hat = c.estimator.theta_hat0;
  st.Gamma = c.estimator.Gamma0;
  st.Wc = c.adp.Wc0;
  st.Upsilon = c.adp.Upsilon0;
  st.Wa = c.adp.Wa0;

  const long steps = std::lround(c.duration / c.dt);
  const long stride = std::max(1L, std::lround(c.estimator.capture_period / c.dt));
  const int decim = std::max(1, c.log_decimation);

  double J = 0.0;
  result.sigmin_grid_inf = std::numeric_limits<double>::infinity();
  result.omega_over_rho_max = 0.0;
  result.gamma_eig_min = std::numeric_limits<double>::infinity();
  result.gamma_eig_max = 0.0;
  result.upsilon_eig_min = std::numeric_limits<double>::infinity();
  result.upsilon_eig_max = 0.0;
  bool in_obstacle = false;
  double enter_t = 0.0;
  double final_t = 0.0;

  for (long i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) * c.dt;

    const double h_now = h_monitor ? h_monitor(st.x) : 0.0;
    if (bas && !(h_now > 0.0)) {
      result.status = RunStatus::SafetyViolation;
      result.error_kind = "safety-violation";
      result.error_detail = "h(x) = " + std::to_string(h_now);
      result.error_t = t;
      result.violation_count += 1;
      break;
    }
    if (!bas && h_monitor) {
      if (h_now < 0.0 && !in_obstacle) {
        in_obstacle = true;
        enter_t = t;
      } else if (h_now >= 0.0 && in_obstacle) {
        in_obstacle = false;
        result.incursions.emplace_back(enter_t, t);
      }
    }

    const Vec s = assemble_s(ctx, st);
    const ActorState actor{st.Wa};
    const CriticState critic{st.Wc, st.Upsilon};
    const Vec u_now = applied_control(ctx.basis, actor, s, ctx.system, c.R);
    buffer.push(t, st.x, u_now);

    if (t >= c.estimator.window - 1e-9 && i % stride == 0 && buffer.spans_window()) {
      const HistoryEntry entry =
          capture_window(ctx.model, std::span<const BufferSample>(buffer.samples()),
                         c.estimator.kappa);
      const AdmitResult admit = stack.try_admit(entry);
      if (admit.admitted) {
        result.admissions.push_back(
            AdmissionEvent{t, admit.slot, admit.min_eig_before, admit.min_eig_after});
        result.admitted_entries.push_back(entry);
        if (stack.full() && result.stack_full_time < 0.0) result.stack_full_time = t;
      }
    }

    // Forgetting suspension is decided once per step from the current Upsilon.
    const SymEigen ueig = jacobi_sym_eigen(st.Upsilon);
    const bool suspend =
        ueig.values[0] < c.adp.upsilon_floor || ueig.values[L - 1] > c.adp.upsilon_ceiling;
    result.upsilon_eig_min = std::min(result.upsilon_eig_min, ueig.values[0]);
    result.upsilon_eig_max = std::max(result.upsilon_eig_max, ueig.values[L - 1]);

    if (i % decim == 0 || i == steps) {
      const BellmanEval on = bellman_error(ctx.basis, critic, actor, s, st.theta_hat,
                                           ctx.system, c.Q, c.R, c.adp.nu);
      const ExtrapSums sums = ctx.grid_ws->evaluate(st.theta_hat, st.Wc, st.Wa, c.adp.nu);
      const double sigmin_grid =
          sums.M > 0 ? sym_min_eig(sums.gram / static_cast<double>(sums.M)) : 0.0;
      const SymEigen geig = jacobi_sym_eigen(st.Gamma);

      LogRow row;
      row.t = t;
      row.x = st.x;
      row.z = st.z;
      row.zhat = st.zhat;
      row.theta_hat = st.theta_hat;
      row.theta_err = (ctx.model.theta_true - st.theta_hat).norm();
      row.Wc = st.Wc;
      row.Wa = st.Wa;
      row.u = u_now;
      row.delta = on.delta;
      row.h = h_now;
      row.sigmin_stack = stack.min_eig();
      row.sigmin_grid = sigmin_grid;
      row.J = J;
      result.rows.push_back(std::move(row));

      // The excitation infimum is taken over the per-step sequence; the i=0
      // row is the pre-learning snapshot (structurally rank-deficient
      // whenever theta_hat0 = 0 on plants with pure-drift channels).
      if (i > 0) result.sigmin_grid_inf = std::min(result.sigmin_grid_inf, sigmin_grid);
      result.omega_over_rho_max =
          std::max(result.omega_over_rho_max, on.omega.norm() / on.rho);
      result.gamma_eig_min = std::min(result.gamma_eig_min, geig.values[0]);
      result.gamma_eig_max = std::max(result.gamma_eig_max, geig.values[ctx.model.p - 1]);
    }
    final_t = t;
    if (i == steps) break;

    J += c.dt * (s.dot(c.Q * s) + u_now.dot(c.R * u_now));

    try {
      Vec y = pack_bundle(ctx, st);
      y = rk4_step(
          [&](double tt, const Vec& yy) {
            return pack_bundle(ctx,
                               closed_loop_deriv(ctx, stack, unpack_bundle(ctx, yy), tt,
                                                 suspend));
          },
          t, y, c.dt);
      st = unpack_bundle(ctx, y);
    } catch (const SafetyViolationError& e) {
      result.status = RunStatus::SafetyViolation;
      result.error_kind = "safety-violation";
      result.error_detail = e.what();
      result.error_t = e.t;
      result.violation_count += 1;
      break;
    } catch (const BarrierDomainError& e) {
      result.status = RunStatus::SafetyViolation;
      result.error_kind = "barrier-domain";
      result.error_detail = e.what();
      result.error_t = t;
      result.violation_count += 1;
      break;
    } catch (const UnsafeStateError& e) {
      result.status = RunStatus::SafetyViolation;
      result.error_kind = "safety-violation";
      result.error_detail = e.what();
      result.error_t = t;
      result.violation_count += 1;
      break;
    } catch (const IntegrationBlowupError& e) {
      result.status = RunStatus::Blowup;
      result.error_kind = "blowup";
      result.error_detail = e.what();
      result.error_t = e.t;
      break;
    }

    // Step hygiene: Gamma/Upsilon drift asymmetric under integration, and a
    // discrete step can leave the theta ball by O(dt^2) while riding it.
    st.Gamma = 0.5 * (st.Gamma + st.Gamma.transpose()).eval();
    st.Upsilon = 0.5 * (st.Upsilon + st.Upsilon.transpose()).eval();
    const double tn = st.theta_hat.norm();
    if (tn > ctx.model.theta_bound) st.theta_hat *= ctx.model.theta_bound / tn;
    if (!all_finite(st.x) || !all_finite(st.theta_hat) || !all_finite(st.Gamma) ||
        !all_finite(st.Wc) || !all_finite(st.Upsilon) || !all_finite(st.Wa) ||
        !std::isfinite(st.z) || !std::isfinite(st.zhat)) {
      result.status = RunStatus::Blowup;
      result.error_kind = "blowup";
      result.error_detail = "non-finite state after step";
      result.error_t = t + c.dt;
      break;
    }
  }

  if (!bas && in_obstacle) result.incursions.emplace_back(enter_t, final_t);

  if (!result.rows.empty()) result.metrics = compute_metrics(result.rows);
  result.theorem2 = check_theorem2_gains(c.estimator.beta_theta, c.estimator.k_theta,
                                         result.gamma_eig_max, stack);
  result.final_entries = stack.entries();
  result.stack_min_eig_final = stack.min_eig();
  if (!std::isfinite(result.sigmin_grid_inf)) result.sigmin_grid_inf = 0.0;
  if (!std::isfinite(result.gamma_eig_min)) result.gamma_eig_min = 0.0;
  if (!std::isfinite(result.upsilon_eig_min)) result.upsilon_eig_min = 0.0;
  return result;
}

Metrics compute_metrics(const std::vector<LogRow>& rows) {
  if (rows.empty()) throw InsufficientDataError("compute_metrics: empty log");
  Metrics m;
  m.min_h = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) {
    if (r.h < m.min_h) {
      m.min_h = r.h;
      m.argmin_t = r.t;
    }
  }
  m.theta_err_final = rows.back().theta_err;
  m.J_total = rows.back().J;
  const size_t start = rows.size() - std::max<size_t>(1, rows.size() / 10);
  double sup = 0.0;
  for (size_t i = start; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const double ztilde = r.z - r.zhat;
    sup = std::max(sup, std::sqrt(r.x.squaredNorm() + ztilde * ztilde +
                                  r.theta_err * r.theta_err));
  }
  m.ultimate_bound_last10 = sup;
  return m;
}

double scalar_are_solution(double a, double b, double q, double r) {
  if (b == 0.0) throw Error("scalar_are_solution: b must be nonzero");
  if (!(r > 0.0) || !(q > 0.0)) throw Error("scalar_are_solution: q, r must be positive");
  return r * (a + std::sqrt(a * a + b * b * q / r)) / (b * b);
}

LqrOracleReport run_lqr_oracle(const ScenarioConfig& cfg) {
  if (cfg.plant != PlantKind::ScalarLinear)
    throw ConfigError("model.type", "the LQR oracle needs the scalar-linear plant");
  const RunResult run = run_scenario(cfg);
  if (run.status != RunStatus::Ok)
    throw Error("run_lqr_oracle: scenario did not complete (" + run.error_kind + ")");

  LqrOracleReport rep;
  rep.a = cfg.theta_true[0];
  rep.b = cfg.input_gain_b;
  rep.q = cfg.Q(0, 0);
  rep.r = cfg.R(0, 0);
  rep.P_star = scalar_are_solution(rep.a, rep.b, rep.q, rep.r);
  rep.Wc_final = run.rows.back().Wc[0];
  rep.Wa_final = run.rows.back().Wa[0];
  rep.err_Wc = std::abs(rep.Wc_final - rep.P_star) / std::abs(rep.P_star);
  rep.err_Wa = std::abs(rep.Wa_final - rep.P_star) / std::abs(rep.P_star);
  rep.within_2pct = rep.err_Wc <= 0.02 && rep.err_Wa <= 0.02;
  return rep;
}

}  // namespace bastion
