#pragma once

#include <Eigen/Dense>

#include "erg/scenarios.hpp"

namespace erg {

/// One update of the prediction-based baseline: g = g_prev + kappa* (r -
/// g_prev) where kappa* is the largest grid fraction in [0, 1] whose
/// constant-g prediction over the horizon satisfies every constraint at
/// every prediction sample. Falls back to holding g_prev when no candidate
/// is feasible; *hold_infeasible reports whether even the hold failed.
Eigen::VectorXd obrg_step(const Eigen::VectorXd& x, const Eigen::VectorXd& g_prev,
                          const Eigen::VectorXd& r, const Scenario& scenario,
                          const ObrgConfig& config, bool* hold_infeasible = nullptr);

/// Feasibility of one candidate command from state x (used by obrg_step and
/// by the recursive-feasibility property test).
bool obrg_candidate_feasible(const Eigen::VectorXd& x, const Eigen::VectorXd& g_cand,
                             const Scenario& scenario, const ObrgConfig& config);

}  // namespace erg
