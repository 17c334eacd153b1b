#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "erg/lyapunov_geometry.hpp"

namespace erg {

/// Pre-compensated closed-loop plant: dynamics, steady-state map, its
/// Jacobian, and an optional feedforward speed bound for the governor.
class PlantModel {
 public:
  virtual ~PlantModel() = default;

  virtual int state_dim() const = 0;
  virtual int reference_dim() const = 0;

  virtual Eigen::VectorXd dynamics(const Eigen::VectorXd& x, const Eigen::VectorXd& g) const = 0;
  virtual Eigen::VectorXd steady_state(const Eigen::VectorXd& g) const = 0;

  /// n x m Jacobian of the steady-state map (constant for both built-in
  /// families).
  virtual Eigen::MatrixXd steady_state_jacobian(const Eigen::VectorXd& g) const = 0;

  /// Lyapunov value gated by the governor. Defaults to the quadratic form;
  /// the robot family overrides with its full energy function, of which the
  /// quadratic form is the lower bound used for the threshold geometry.
  virtual double lyapunov_value(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                                const QuadraticForm& form) const;

  virtual bool has_feedforward() const { return false; }

  /// Largest reference speed along rho that keeps Vdot below every active
  /// threshold derivative; in [0, nu_max].
  virtual double feedforward(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                             const Eigen::VectorXd& r, const Eigen::VectorXd& rho,
                             const ActiveSet& active,
                             const std::vector<PolytopicConstraint>& constraints,
                             const QuadraticForm& form, double nu_max) const;
};

/// Continuous Lyapunov equation A'P + PA = -Q for Hurwitz A, solved through
/// the Kronecker-vectorized linear system (n is small everywhere here).
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q);

/// x_g = -A^{-1} B g.
Eigen::VectorXd linear_steady_state(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                    const Eigen::VectorXd& g);

/// Stable linear closed loop xdot = A x + B g with no feedforward provider.
class LinearClosedLoopPlant : public PlantModel {
 public:
  LinearClosedLoopPlant(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

  int state_dim() const override { return static_cast<int>(a_.rows()); }
  int reference_dim() const override { return static_cast<int>(b_.cols()); }
  Eigen::VectorXd dynamics(const Eigen::VectorXd& x, const Eigen::VectorXd& g) const override;
  Eigen::VectorXd steady_state(const Eigen::VectorXd& g) const override;
  Eigen::MatrixXd steady_state_jacobian(const Eigen::VectorXd& g) const override;

  const Eigen::MatrixXd& a() const { return a_; }
  const Eigen::MatrixXd& b() const { return b_; }
  /// A^{-1} B, cached.
  const Eigen::MatrixXd& ainv_b() const { return ainv_b_; }

 protected:
  Eigen::MatrixXd a_, b_;
  Eigen::MatrixXd ainv_b_;
};

/// Linear closed loop with a Lyapunov pair (P, Q) and the closed-form
/// feedforward of the linear specialization.
class LinearPlant final : public LinearClosedLoopPlant {
 public:
  LinearPlant(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& q);

  const Eigen::MatrixXd& q() const { return q_; }
  const Eigen::MatrixXd& p() const { return p_; }
  QuadraticForm lyapunov_form() const { return QuadraticForm(p_); }

  bool has_feedforward() const override { return true; }
  double feedforward(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                     const Eigen::VectorXd& r, const Eigen::VectorXd& rho,
                     const ActiveSet& active,
                     const std::vector<PolytopicConstraint>& constraints,
                     const QuadraticForm& form, double nu_max) const override;

 private:
  Eigen::MatrixXd q_, p_;
};

/// Largest nu such that Vdot(rho nu) <= min_i Gammadot_i(rho nu) for the
/// linear family; active indices with nonpositive denominator impose no
/// bound; if none binds, returns nu_max. Clamped to [0, nu_max].
double nu_linear(const Eigen::VectorXd& x, const Eigen::VectorXd& g, const Eigen::VectorXd& rho,
                 const LinearPlant& plant, const std::vector<PolytopicConstraint>& constraints,
                 const QuadraticForm& form, const ActiveSet& active, double nu_max);

/// PD-with-gravity-compensation manipulator. State is (q, qdot); the applied
/// torque is u = G(q) - K_P (q - g) - K_D qdot, so gravity cancels exactly.
class RobotPlant final : public PlantModel {
 public:
  using MassFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd& q)>;
  using CoriolisFn =
      std::function<Eigen::MatrixXd(const Eigen::VectorXd& q, const Eigen::VectorXd& qd)>;
  using GravityFn = std::function<Eigen::VectorXd(const Eigen::VectorXd& q)>;

  RobotPlant(int joints, MassFn mass, CoriolisFn coriolis, GravityFn gravity,
             const Eigen::VectorXd& kp, const Eigen::VectorXd& kd, int mass_grid = 361);

  int state_dim() const override { return 2 * joints_; }
  int reference_dim() const override { return joints_; }
  int joints() const { return joints_; }

  Eigen::VectorXd dynamics(const Eigen::VectorXd& x, const Eigen::VectorXd& g) const override;
  Eigen::VectorXd steady_state(const Eigen::VectorXd& g) const override;
  Eigen::MatrixXd steady_state_jacobian(const Eigen::VectorXd& g) const override;

  /// Full energy Lyapunov function 1/2 (q-g)'K_P(q-g) + 1/2 qdot'M(q)qdot.
  double lyapunov_value(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                        const QuadraticForm& form) const override;

  bool has_feedforward() const override { return true; }
  double feedforward(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                     const Eigen::VectorXd& r, const Eigen::VectorXd& rho,
                     const ActiveSet& active,
                     const std::vector<PolytopicConstraint>& constraints,
                     const QuadraticForm& form, double nu_max) const override;

  const Eigen::VectorXd& kp() const { return kp_; }
  const Eigen::VectorXd& kd() const { return kd_; }
  Eigen::MatrixXd mass(const Eigen::VectorXd& q) const { return mass_(q); }
  Eigen::MatrixXd coriolis(const Eigen::VectorXd& q, const Eigen::VectorXd& qd) const {
    return coriolis_(q, qd);
  }
  Eigen::VectorXd gravity(const Eigen::VectorXd& q) const { return gravity_(q); }

  /// Constant PSD lower bound of M(q), a scaled identity.
  const Eigen::MatrixXd& mass_bound() const { return m_lower_; }
  /// P = 1/2 diag(K_P, M_lower).
  QuadraticForm lyapunov_form() const { return QuadraticForm(p_); }

 private:
  int joints_;
  MassFn mass_;
  CoriolisFn coriolis_;
  GravityFn gravity_;
  Eigen::VectorXd kp_, kd_;
  Eigen::MatrixXd m_lower_;
  Eigen::MatrixXd p_;
};

/// Closed-loop state derivative (qdot, M^{-1}(-C qdot - K_P(q-g) - K_D qdot)).
Eigen::VectorXd robot_dynamics(const Eigen::VectorXd& q, const Eigen::VectorXd& q_dot,
                               const Eigen::VectorXd& g, const RobotPlant& plant);

/// M_lower = (1 - 1e-6) * (grid minimum of lambda_min(M(q))) * I over joints
/// the inertia actually depends on; errors if the minimum is nonpositive.
Eigen::MatrixXd mass_lower_bound(const RobotPlant::MassFn& mass, int joints, int grid_size);
Eigen::MatrixXd mass_lower_bound(const RobotPlant& plant, int grid_size);

/// Largest nu for the robot family, same skip/clamp conventions as nu_linear.
double nu_robot(const Eigen::VectorXd& x, const Eigen::VectorXd& g, const Eigen::VectorXd& rho,
                const RobotPlant& plant, const std::vector<PolytopicConstraint>& constraints,
                const ActiveSet& active, double nu_max);

/// Planar two-link arm physical parameters (SI units).
struct TwoLinkParams {
  double m1 = 4.0;
  double m2 = 3.0;
  double l1 = 0.4;
  double l2 = 0.3;
  double r1 = 0.2;
  double r2 = 0.15;
  double iz1 = 4.0 * 0.4 * 0.4 / 12.0;
  double iz2 = 3.0 * 0.3 * 0.3 / 12.0;
  double gravity = 9.81;
};

struct TwoLinkMatrices {
  Eigen::Matrix2d m;
  Eigen::Matrix2d c;
  Eigen::Vector2d g;
};

/// Inertia, Coriolis and gravity terms of the planar two-link arm.
TwoLinkMatrices two_link_matrices(const Eigen::VectorXd& q, const Eigen::VectorXd& q_dot,
                                  const TwoLinkParams& params);

RobotPlant make_two_link_arm(const TwoLinkParams& params, const Eigen::VectorXd& kp,
                             const Eigen::VectorXd& kd, int mass_grid = 361);

}  // namespace erg
