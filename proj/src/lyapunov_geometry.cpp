#include "erg/lyapunov_geometry.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace erg {

namespace {
constexpr double kSymmetryTol = 1e-12;  // relative
constexpr double kTieAbsTol = 1e-12;
}  // namespace

PolytopicConstraint::PolytopicConstraint(Eigen::VectorXd cx, Eigen::VectorXd cg, double offset)
    : c_x(std::move(cx)), c_g(std::move(cg)), d(offset) {
  validate(static_cast<int>(c_x.size()));
}

void PolytopicConstraint::validate(int state_dim) const {
  if (c_x.size() != state_dim || c_g.size() != state_dim) {
    throw std::invalid_argument("constraint coefficient dimensions do not match state dimension");
  }
  if (c_x.norm() == 0.0) {
    throw std::invalid_argument("constraint state coefficients c_x must be nonzero");
  }
}

double PolytopicConstraint::margin(const Eigen::VectorXd& x, const Eigen::VectorXd& x_g) const {
  return c_x.dot(x) + c_g.dot(x_g) + d;
}

QuadraticForm::QuadraticForm(const Eigen::MatrixXd& p) : p_(p) {
  if (p_.rows() != p_.cols() || p_.rows() == 0) {
    throw std::invalid_argument("quadratic form matrix must be square and nonempty");
  }
  const double scale = p_.cwiseAbs().maxCoeff();
  if (!((p_ - p_.transpose()).cwiseAbs().maxCoeff() <= kSymmetryTol * scale)) {
    throw std::invalid_argument("quadratic form matrix must be symmetric");
  }
  p_ = 0.5 * (p_ + p_.transpose().eval());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p_, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0) {
    throw std::invalid_argument("quadratic form matrix must be positive definite");
  }
  llt_.compute(p_);
  if (llt_.info() != Eigen::Success) {
    throw std::invalid_argument("quadratic form factorization failed");
  }
}

Eigen::VectorXd QuadraticForm::solve(const Eigen::VectorXd& v) const {
  if (v.size() != p_.rows()) {
    throw std::invalid_argument("vector dimension does not match quadratic form");
  }
  return llt_.solve(v);
}

double QuadraticForm::value(const Eigen::VectorXd& x, const Eigen::VectorXd& x_g) const {
  if (x.size() != p_.rows() || x_g.size() != p_.rows()) {
    throw std::invalid_argument("state dimension does not match quadratic form");
  }
  const Eigen::VectorXd diff = x - x_g;
  return diff.dot(p_ * diff);
}

double gamma_i(const PolytopicConstraint& constraint, const QuadraticForm& form,
               const Eigen::VectorXd& x_g) {
  constraint.validate(form.dim());
  if (x_g.size() != form.dim()) {
    throw std::invalid_argument("steady state dimension does not match quadratic form");
  }
  const double slack = (constraint.c_x + constraint.c_g).dot(x_g) + constraint.d;
  if (slack < 0.0) return kInfeasibleGamma;
  const double denom = constraint.c_x.dot(form.solve(constraint.c_x));
  return slack * slack / denom;
}

ActiveSet gamma_active_set(const std::vector<PolytopicConstraint>& constraints,
                           const QuadraticForm& form, const Eigen::VectorXd& x_g,
                           double tie_tol) {
  if (constraints.empty()) {
    throw std::invalid_argument("constraint list must be nonempty");
  }
  std::vector<double> gammas(constraints.size());
  double gmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    gammas[i] = gamma_i(constraints[i], form, x_g);
    gmin = std::min(gmin, gammas[i]);
  }
  ActiveSet active;
  active.gamma_min = gmin;
  const double cutoff = gmin + tie_tol * std::abs(gmin) + kTieAbsTol;
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    if (gammas[i] <= cutoff) active.indices.push_back(static_cast<int>(i));
  }
  return active;
}

Eigen::VectorXd grad_gamma_i(const PolytopicConstraint& constraint, const QuadraticForm& form,
                             const Eigen::VectorXd& x_g, const Eigen::MatrixXd& nabla_xg) {
  constraint.validate(form.dim());
  if (nabla_xg.rows() != form.dim()) {
    throw std::invalid_argument("steady-state Jacobian row count does not match state dimension");
  }
  const Eigen::VectorXd csum = constraint.c_x + constraint.c_g;
  const double slack = csum.dot(x_g) + constraint.d;
  const double denom = constraint.c_x.dot(form.solve(constraint.c_x));
  return (2.0 * slack / denom) * (csum.transpose() * nabla_xg).transpose();
}

double quadratic_v(const QuadraticForm& form, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& x_g) {
  return form.value(x, x_g);
}

}  // namespace erg
