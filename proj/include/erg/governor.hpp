#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "erg/lyapunov_geometry.hpp"
#include "erg/plants.hpp"

namespace erg {

/// Tunables of the explicit governor law gdot = rho_hat * (nu + phi) * sigma * l.
struct ErgParameters {
  double kappa = 100.0;        // feedback gain on Gamma_I - V
  double eps1 = 1e-3;          // smoothing width of the stop term
  double eps2 = 1e-3;          // static safety margin held at the boundary
  double nu_max = 1.0;         // cap on the feedforward term
  double tie_tol = 1e-9;       // active-set tie tolerance
  double zero_dist_tol = 1e-9; // below this distance g and r are considered equal

  void validate() const;
};

/// Per-evaluation decomposition of the governor output.
struct GammaBreakdown {
  Eigen::VectorXd rho_hat;
  double nu = 0.0;
  double phi = 0.0;
  double sigma = 0.0;
  double limiter = 0.0;
  double gamma = 0.0;
  double gamma_min = 0.0;
  double v = 0.0;
};

/// Unit direction from g toward r; zero when the two are within
/// zero_dist_tol (the sigma term independently vanishes at g = r).
Eigen::VectorXd rho_hat(const Eigen::VectorXd& g, const Eigen::VectorXd& r, double zero_dist_tol);

/// min(1, |r - g| / eps1), the smooth stop at g = r.
double sigma_term(const Eigen::VectorXd& g, const Eigen::VectorXd& r, double eps1);

/// max(0, kappa (Gamma_I - V)); clamped because discretization can push V
/// transiently past Gamma_I.
double phi_term(double gamma_min, double v, double kappa);

/// Boundary limiter: when some active threshold decreases along rho_hat,
/// scales down to zero as Gamma_I approaches eps2.
double limiter_term(const ActiveSet& active, const std::vector<Eigen::VectorXd>& grads,
                    const Eigen::VectorXd& rho, double eps2);

/// One evaluation of the governor law. Throws InitializationError when the
/// current command is infeasible (gamma_min <= 0 with V > 0), which Theorem-1
/// style initialization rules out. use_feedforward=false forces nu = 0.
std::pair<Eigen::VectorXd, GammaBreakdown> g_dot(
    const Eigen::VectorXd& x, const Eigen::VectorXd& g, const Eigen::VectorXd& r,
    const PlantModel& plant, const QuadraticForm& form,
    const std::vector<PolytopicConstraint>& constraints, const ErgParameters& params,
    bool use_feedforward = true);

}  // namespace erg
