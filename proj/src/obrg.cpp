#include "erg/obrg.hpp"

#include <cmath>

#include "erg/simulation.hpp"

namespace erg {

bool obrg_candidate_feasible(const Eigen::VectorXd& x, const Eigen::VectorXd& g_cand,
                             const Scenario& scenario, const ObrgConfig& config) {
  const double dt_pred = config.ts / 10.0;
  const int steps = std::max(1, static_cast<int>(std::llround(config.horizon / dt_pred)));
  const Eigen::VectorXd x_g = scenario.plant->steady_state(g_cand);
  const auto states = integrate_fixed_reference(*scenario.plant, x, g_cand, dt_pred, steps);
  for (const Eigen::VectorXd& state : states) {
    for (const PolytopicConstraint& c : scenario.constraints) {
      if (c.margin(state, x_g) < 0.0) return false;
    }
  }
  return true;
}

Eigen::VectorXd obrg_step(const Eigen::VectorXd& x, const Eigen::VectorXd& g_prev,
                          const Eigen::VectorXd& r, const Scenario& scenario,
                          const ObrgConfig& config, bool* hold_infeasible) {
  config.validate();
  if (hold_infeasible) *hold_infeasible = false;
  // Scan fractions from 1 downward and commit to the first feasible one.
  for (int j = 0; j < config.kappa_grid; ++j) {
    const double kappa = 1.0 - static_cast<double>(j) / (config.kappa_grid - 1);
    const Eigen::VectorXd g_cand = g_prev + kappa * (r - g_prev);
    if (obrg_candidate_feasible(x, g_cand, scenario, config)) return g_cand;
  }
  if (hold_infeasible) *hold_infeasible = true;
  return g_prev;
}

}  // namespace erg
