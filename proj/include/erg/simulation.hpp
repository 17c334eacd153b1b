#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "erg/governor.hpp"
#include "erg/scenarios.hpp"

namespace erg {

/// Time-indexed record of one simulation run, on the uniform grid
/// t_k = k dt, k = 0 .. duration/dt.
struct Trajectory {
  std::vector<double> t;
  std::vector<Eigen::VectorXd> x;
  std::vector<Eigen::VectorXd> g;
  std::vector<Eigen::VectorXd> r;
  std::vector<double> v;
  std::vector<double> gamma_min;
  std::vector<Eigen::VectorXd> margins;   // one entry per constraint
  std::vector<GammaBreakdown> breakdown;  // zeroed for non-ERG governors

  // metadata
  std::string scenario_name;
  std::uint64_t scenario_hash = 0;
  double dt = 0.0;
  GovernorKind governor = GovernorKind::none;
  double governor_eval_seconds = 0.0;
  std::size_t governor_evals = 0;
  bool obrg_hold_infeasible = false;

  std::size_t rows() const { return t.size(); }
};

/// Run summary statistics.
struct Metrics {
  /// Seconds after the last reference change until |g-r| and |x-x_r| enter
  /// and remain within 2% of the step magnitude; equals the remaining run
  /// length when the band is never held.
  double settling_time = 0.0;
  double min_margin = 0.0;
  double max_v_excess = 0.0;
  double max_gdot = 0.0;
  /// Mean wall-clock seconds per governor evaluation (zero without one).
  double per_step_cost = 0.0;
};

using DerivativeFn = std::function<Eigen::VectorXd(double t, const Eigen::VectorXd& state)>;

/// Classical fourth-order Runge-Kutta update. Throws DivergenceError on a
/// non-finite stage derivative.
Eigen::VectorXd rk4_step(const DerivativeFn& f, const Eigen::VectorXd& state, double t, double dt);

/// Fixed-reference rollout used by the prediction baseline: `steps` RK4 steps
/// of the plant with g held constant; returns steps+1 states including x0.
std::vector<Eigen::VectorXd> integrate_fixed_reference(const PlantModel& plant,
                                                       const Eigen::VectorXd& x0,
                                                       const Eigen::VectorXd& g, double dt,
                                                       int steps);

/// Integrates the scenario under its configured governor and records the
/// trajectory. Governor `none` applies g = r directly; `erg` integrates the
/// stacked (x, g) system with the governor inside every RK4 stage; `obrg`
/// holds g piecewise-constant between its sampling instants.
Trajectory simulate(const Scenario& scenario);

Metrics compute_metrics(const Trajectory& traj, const Scenario& scenario);

}  // namespace erg
