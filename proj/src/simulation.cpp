#include "erg/simulation.hpp"

#include <chrono>
#include <cmath>

#include "erg/errors.hpp"
#include "erg/obrg.hpp"

namespace erg {

namespace {

constexpr double kStateBound = 1e9;

using Clock = std::chrono::steady_clock;

void check_finite(const Eigen::VectorXd& state) {
  if (!state.allFinite() || state.cwiseAbs().maxCoeff() > kStateBound) {
    throw DivergenceError("dynamics diverged");
  }
}

GammaBreakdown zero_breakdown(int m) {
  GammaBreakdown b;
  b.rho_hat = Eigen::VectorXd::Zero(m);
  return b;
}

}  // namespace

Eigen::VectorXd rk4_step(const DerivativeFn& f, const Eigen::VectorXd& state, double t, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("rk4 step size must be > 0");
  const Eigen::VectorXd k1 = f(t, state);
  const Eigen::VectorXd k2 = f(t + 0.5 * dt, state + 0.5 * dt * k1);
  const Eigen::VectorXd k3 = f(t + 0.5 * dt, state + 0.5 * dt * k2);
  const Eigen::VectorXd k4 = f(t + dt, state + dt * k3);
  if (!k1.allFinite() || !k2.allFinite() || !k3.allFinite() || !k4.allFinite()) {
    throw DivergenceError("dynamics diverged");
  }
  return state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

std::vector<Eigen::VectorXd> integrate_fixed_reference(const PlantModel& plant,
                                                       const Eigen::VectorXd& x0,
                                                       const Eigen::VectorXd& g, double dt,
                                                       int steps) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  out.push_back(x0);
  const DerivativeFn f = [&plant, &g](double, const Eigen::VectorXd& x) {
    return plant.dynamics(x, g);
  };
  for (int k = 0; k < steps; ++k) {
    out.push_back(rk4_step(f, out.back(), k * dt, dt));
  }
  return out;
}

Trajectory simulate(const Scenario& scenario) {
  scenario.validate();
  const PlantModel& plant = *scenario.plant;
  const QuadraticForm& form = *scenario.form;
  const int n = plant.state_dim();
  const int m = plant.reference_dim();
  const double dt = scenario.dt;
  const auto steps = static_cast<std::size_t>(std::llround(scenario.duration / dt));
  const bool erg_kind =
      scenario.governor == GovernorKind::erg || scenario.governor == GovernorKind::erg_no_ff;
  const bool use_ff = scenario.governor == GovernorKind::erg;

  Trajectory traj;
  traj.scenario_name = scenario.name;
  traj.scenario_hash = scenario.hash();
  traj.dt = dt;
  traj.governor = scenario.governor;
  traj.t.reserve(steps + 1);

  Eigen::VectorXd x = scenario.x0;
  Eigen::VectorXd g = erg_kind ? scenario.g0 : scenario.reference_at(0.0);
  if (scenario.governor == GovernorKind::obrg) g = scenario.g0;

  const auto record = [&](double t) {
    const Eigen::VectorXd r = scenario.reference_at(t);
    const Eigen::VectorXd g_sample = scenario.governor == GovernorKind::none ? r : g;
    const Eigen::VectorXd x_g = plant.steady_state(g_sample);
    traj.t.push_back(t);
    traj.x.push_back(x);
    traj.g.push_back(g_sample);
    traj.r.push_back(r);
    Eigen::VectorXd margin(static_cast<Eigen::Index>(scenario.constraints.size()));
    for (std::size_t i = 0; i < scenario.constraints.size(); ++i) {
      margin[static_cast<Eigen::Index>(i)] = scenario.constraints[i].margin(x, x_g);
    }
    traj.margins.push_back(std::move(margin));
    const ActiveSet active = gamma_active_set(scenario.constraints, form, x_g, scenario.erg.tie_tol);
    traj.gamma_min.push_back(active.gamma_min);
    traj.v.push_back(plant.lyapunov_value(x, g_sample, form));
    if (erg_kind) {
      // Recording-only evaluation, excluded from the governor timing.
      traj.breakdown.push_back(
          g_dot(x, g_sample, r, plant, form, scenario.constraints, scenario.erg, use_ff).second);
    } else {
      traj.breakdown.push_back(zero_breakdown(m));
    }
  };

  if (erg_kind) {
    Eigen::VectorXd y(n + m);
    y.head(n) = x;
    y.tail(m) = g;
    const DerivativeFn f = [&](double t, const Eigen::VectorXd& state) {
      const Eigen::VectorXd xs = state.head(n);
      const Eigen::VectorXd gs = state.tail(m);
      const Eigen::VectorXd r = scenario.reference_at(t);
      const auto started = Clock::now();
      Eigen::VectorXd gd;
      try {
        gd = g_dot(xs, gs, r, plant, form, scenario.constraints, scenario.erg, use_ff).first;
      } catch (const InitializationError& e) {
        // Past t=0 an infeasible command means the integration left the
        // admissible set, which is a divergence, not a setup problem.
        throw DivergenceError(e.what());
      }
      traj.governor_eval_seconds += std::chrono::duration<double>(Clock::now() - started).count();
      ++traj.governor_evals;
      Eigen::VectorXd out(n + m);
      out.head(n) = plant.dynamics(xs, gs);
      out.tail(m) = gd;
      return out;
    };
    record(0.0);
    for (std::size_t k = 0; k < steps; ++k) {
      y = rk4_step(f, y, static_cast<double>(k) * dt, dt);
      check_finite(y);
      x = y.head(n);
      g = y.tail(m);
      record(static_cast<double>(k + 1) * dt);
    }
  } else if (scenario.governor == GovernorKind::obrg) {
    double next_update = 0.0;
    for (std::size_t k = 0; k <= steps; ++k) {
      const double t = static_cast<double>(k) * dt;
      if (t + 1e-12 >= next_update) {
        bool hold_infeasible = false;
        const auto started = Clock::now();
        g = obrg_step(x, g, scenario.reference_at(t), scenario, scenario.obrg, &hold_infeasible);
        traj.governor_eval_seconds += std::chrono::duration<double>(Clock::now() - started).count();
        ++traj.governor_evals;
        traj.obrg_hold_infeasible = traj.obrg_hold_infeasible || hold_infeasible;
        next_update += scenario.obrg.ts;
      }
      record(t);
      if (k == steps) break;
      const Eigen::VectorXd g_held = g;
      const DerivativeFn f = [&plant, &g_held](double, const Eigen::VectorXd& state) {
        return plant.dynamics(state, g_held);
      };
      x = rk4_step(f, x, t, dt);
      check_finite(x);
    }
  } else {  // GovernorKind::none
    const DerivativeFn f = [&](double t, const Eigen::VectorXd& state) {
      return plant.dynamics(state, scenario.reference_at(t));
    };
    record(0.0);
    for (std::size_t k = 0; k < steps; ++k) {
      x = rk4_step(f, x, static_cast<double>(k) * dt, dt);
      check_finite(x);
      record(static_cast<double>(k + 1) * dt);
    }
  }
  return traj;
}

Metrics compute_metrics(const Trajectory& traj, const Scenario& scenario) {
  Metrics metrics;
  if (traj.rows() == 0) return metrics;

  // Last reference change; the program "changes" at t=0 from g0 to r(0).
  double t_change = 0.0;
  double magnitude = (scenario.reference.front().value - scenario.g0).norm();
  for (std::size_t i = 1; i < scenario.reference.size(); ++i) {
    const double step = (scenario.reference[i].value - scenario.reference[i - 1].value).norm();
    if (step > 0.0) {
      t_change = scenario.reference[i].time;
      magnitude = step;
    }
  }

  const Eigen::VectorXd r_final = scenario.reference_at(traj.t.back());
  const Eigen::VectorXd x_r = scenario.plant->steady_state(r_final);
  const double band = 0.02 * magnitude;

  std::size_t settled_from = traj.rows();
  for (std::size_t k = traj.rows(); k-- > 0;) {
    const bool inside =
        (traj.g[k] - traj.r[k]).norm() <= band && (traj.x[k] - x_r).norm() <= band;
    if (!inside) break;
    settled_from = k;
  }
  if (settled_from == traj.rows()) {
    metrics.settling_time = traj.t.back() - t_change;
  } else {
    metrics.settling_time = std::max(0.0, traj.t[settled_from] - t_change);
  }

  double min_margin = std::numeric_limits<double>::infinity();
  double max_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < traj.rows(); ++k) {
    min_margin = std::min(min_margin, traj.margins[k].minCoeff());
    max_excess = std::max(max_excess, traj.v[k] - traj.gamma_min[k]);
  }
  metrics.min_margin = min_margin;
  metrics.max_v_excess = max_excess;

  double max_gdot = 0.0;
  for (std::size_t k = 0; k + 1 < traj.rows(); ++k) {
    max_gdot = std::max(max_gdot, (traj.g[k + 1] - traj.g[k]).norm() / traj.dt);
  }
  metrics.max_gdot = max_gdot;

  metrics.per_step_cost =
      traj.governor_evals == 0 ? 0.0
                               : traj.governor_eval_seconds / static_cast<double>(traj.governor_evals);
  return metrics;
}

}  // namespace erg
