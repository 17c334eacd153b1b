#pragma once

#include <Eigen/Dense>
#include <vector>

namespace erg {

/// One affine constraint c_x'x + c_g'x_g + d >= 0 on the state and the
/// steady state associated with the applied reference.
struct PolytopicConstraint {
  Eigen::VectorXd c_x;
  Eigen::VectorXd c_g;
  double d = 0.0;

  PolytopicConstraint() = default;
  PolytopicConstraint(Eigen::VectorXd cx, Eigen::VectorXd cg, double offset);

  int dim() const { return static_cast<int>(c_x.size()); }

  /// Throws std::invalid_argument on zero c_x or mismatched dimensions.
  void validate(int state_dim) const;

  /// Signed margin c_x'x + c_g'x_g + d at a concrete state / steady-state pair.
  double margin(const Eigen::VectorXd& x, const Eigen::VectorXd& x_g) const;
};

/// Symmetric positive-definite P defining V = (x - x_g)' P (x - x_g).
/// The Cholesky factorization is cached at construction; gamma_i solves
/// against it every integration step.
class QuadraticForm {
 public:
  explicit QuadraticForm(const Eigen::MatrixXd& p);

  int dim() const { return static_cast<int>(p_.rows()); }
  const Eigen::MatrixXd& matrix() const { return p_; }

  /// P^{-1} v via the cached factorization.
  Eigen::VectorXd solve(const Eigen::VectorXd& v) const;

  /// (x - x_g)' P (x - x_g).
  double value(const Eigen::VectorXd& x, const Eigen::VectorXd& x_g) const;

 private:
  Eigen::MatrixXd p_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

/// Indices attaining the minimum Lyapunov threshold at the current command.
struct ActiveSet {
  double gamma_min = 0.0;
  std::vector<int> indices;
};

/// Sentinel returned by gamma_i for commands whose steady state violates the
/// constraint; any negative value works, the governor only compares signs.
inline constexpr double kInfeasibleGamma = -1.0;

/// Largest level of V whose sublevel set around x_g lies inside the
/// constraint halfspace. Returns kInfeasibleGamma when the steady state
/// itself is on the wrong side.
double gamma_i(const PolytopicConstraint& constraint, const QuadraticForm& form,
               const Eigen::VectorXd& x_g);

/// Minimum threshold over a constraint list together with every index within
/// tie tolerance of it (relative tie_tol plus a 1e-12 absolute floor).
ActiveSet gamma_active_set(const std::vector<PolytopicConstraint>& constraints,
                           const QuadraticForm& form, const Eigen::VectorXd& x_g,
                           double tie_tol);

/// Gradient of gamma_i with respect to the reference, via the steady-state
/// map Jacobian nabla_xg (n rows, m columns).
Eigen::VectorXd grad_gamma_i(const PolytopicConstraint& constraint,
                             const QuadraticForm& form, const Eigen::VectorXd& x_g,
                             const Eigen::MatrixXd& nabla_xg);

/// V = (x - x_g)' P (x - x_g).
double quadratic_v(const QuadraticForm& form, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& x_g);

}  // namespace erg
