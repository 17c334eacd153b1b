#include "erg/governor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "erg/errors.hpp"

namespace erg {

void ErgParameters::validate() const {
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be > 0");
  if (!(eps1 > 0.0)) throw std::invalid_argument("eps1 must be > 0");
  if (!(eps2 > 0.0)) throw std::invalid_argument("eps2 must be > 0");
  if (!(nu_max >= 0.0)) throw std::invalid_argument("nu_max must be >= 0");
  if (!(zero_dist_tol > 0.0)) throw std::invalid_argument("zero_dist_tol must be > 0");
}

Eigen::VectorXd rho_hat(const Eigen::VectorXd& g, const Eigen::VectorXd& r, double zero_dist_tol) {
  if (g.size() != r.size()) throw std::invalid_argument("g and r dimensions differ");
  const Eigen::VectorXd diff = r - g;
  const double dist = diff.norm();
  if (dist < zero_dist_tol) return Eigen::VectorXd::Zero(g.size());
  return diff / dist;
}

double sigma_term(const Eigen::VectorXd& g, const Eigen::VectorXd& r, double eps1) {
  return std::min(1.0, (r - g).norm() / eps1);
}

double phi_term(double gamma_min, double v, double kappa) {
  return std::max(0.0, kappa * (gamma_min - v));
}

double limiter_term(const ActiveSet& active, const std::vector<Eigen::VectorXd>& grads,
                    const Eigen::VectorXd& rho, double eps2) {
  double min_descent = std::numeric_limits<double>::infinity();
  for (const Eigen::VectorXd& grad : grads) {
    min_descent = std::min(min_descent, grad.dot(rho));
  }
  if (grads.empty() || min_descent >= 0.0) return 1.0;
  return std::clamp(std::min(1.0, (active.gamma_min - eps2) / eps2), 0.0, 1.0);
}

std::pair<Eigen::VectorXd, GammaBreakdown> g_dot(
    const Eigen::VectorXd& x, const Eigen::VectorXd& g, const Eigen::VectorXd& r,
    const PlantModel& plant, const QuadraticForm& form,
    const std::vector<PolytopicConstraint>& constraints, const ErgParameters& params,
    bool use_feedforward) {
  const Eigen::VectorXd x_g = plant.steady_state(g);
  const ActiveSet active = gamma_active_set(constraints, form, x_g, params.tie_tol);
  const double v = plant.lyapunov_value(x, g, form);
  if (active.gamma_min <= 0.0 && v > 0.0) {
    throw InitializationError("applied command infeasible: gamma_min <= 0 with V > 0");
  }

  const Eigen::VectorXd rho = rho_hat(g, r, params.zero_dist_tol);
  const Eigen::MatrixXd jac = plant.steady_state_jacobian(g);
  std::vector<Eigen::VectorXd> grads;
  grads.reserve(active.indices.size());
  for (int i : active.indices) {
    grads.push_back(grad_gamma_i(constraints[static_cast<std::size_t>(i)], form, x_g, jac));
  }

  GammaBreakdown b;
  b.rho_hat = rho;
  b.gamma_min = active.gamma_min;
  b.v = v;
  b.sigma = sigma_term(g, r, params.eps1);
  b.phi = phi_term(active.gamma_min, v, params.kappa);
  b.limiter = limiter_term(active, grads, rho, params.eps2);
  b.nu = 0.0;
  if (use_feedforward && plant.has_feedforward()) {
    b.nu = std::clamp(plant.feedforward(x, g, r, rho, active, constraints, form, params.nu_max),
                      0.0, params.nu_max);
  }
  b.gamma = (b.nu + b.phi) * b.sigma * b.limiter;
  return {rho * b.gamma, b};
}

}  // namespace erg
