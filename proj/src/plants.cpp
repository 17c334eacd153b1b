#include "erg/plants.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <unsupported/Eigen/KroneckerProduct>

namespace erg {

namespace {

bool is_hurwitz(const Eigen::MatrixXd& a) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
  return es.eigenvalues().real().maxCoeff() < 0.0;
}

void check_spd(const Eigen::MatrixXd& q, const char* what) {
  if (q.rows() != q.cols()) throw std::invalid_argument(std::string(what) + " must be square");
  const double scale = q.cwiseAbs().maxCoeff();
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument(std::string(what) + " must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw std::invalid_argument(std::string(what) + " must be positive definite");
  }
}

}  // namespace

double PlantModel::lyapunov_value(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                                  const QuadraticForm& form) const {
  return form.value(x, steady_state(g));
}

double PlantModel::feedforward(const Eigen::VectorXd&, const Eigen::VectorXd&,
                               const Eigen::VectorXd&, const Eigen::VectorXd&, const ActiveSet&,
                               const std::vector<PolytopicConstraint>&, const QuadraticForm&,
                               double) const {
  return 0.0;
}

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q) {
  const auto n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("A must be square");
  if (q.rows() != n || q.cols() != n) throw std::invalid_argument("Q dimension mismatch");
  check_spd(q, "Q");
  if (!is_hurwitz(a)) throw std::invalid_argument("unstable closed loop");

  // vec(A'P + PA) = (I (x) A' + A' (x) I) vec(P)
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd at = a.transpose();
  Eigen::MatrixXd k = Eigen::kroneckerProduct(eye, at) + Eigen::kroneckerProduct(at, eye);
  Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(q.data(), n * n);
  Eigen::VectorXd vec_p = k.fullPivLu().solve(rhs);
  if (!vec_p.allFinite()) throw std::runtime_error("Lyapunov solver singularity");

  Eigen::MatrixXd p = Eigen::Map<Eigen::MatrixXd>(vec_p.data(), n, n);
  p = 0.5 * (p + p.transpose().eval());

  const double residual = (a.transpose() * p + p * a + q).norm();
  if (residual > 1e-9 * q.norm()) throw std::runtime_error("Lyapunov residual too large");
  check_spd(p, "Lyapunov solution");
  return p;
}

Eigen::VectorXd linear_steady_state(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                    const Eigen::VectorXd& g) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible()) throw std::invalid_argument("A must be invertible");
  return -lu.solve(b * g);
}

LinearClosedLoopPlant::LinearClosedLoopPlant(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
    : a_(a), b_(b) {
  if (a_.rows() != a_.cols()) throw std::invalid_argument("A must be square");
  if (b_.rows() != a_.rows()) throw std::invalid_argument("B row count must match A");
  if (!is_hurwitz(a_)) throw std::invalid_argument("unstable closed loop");
  ainv_b_ = a_.fullPivLu().solve(b_);
}

Eigen::VectorXd LinearClosedLoopPlant::dynamics(const Eigen::VectorXd& x,
                                                const Eigen::VectorXd& g) const {
  return a_ * x + b_ * g;
}

Eigen::VectorXd LinearClosedLoopPlant::steady_state(const Eigen::VectorXd& g) const {
  return -ainv_b_ * g;
}

Eigen::MatrixXd LinearClosedLoopPlant::steady_state_jacobian(const Eigen::VectorXd&) const {
  return -ainv_b_;
}

LinearPlant::LinearPlant(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                         const Eigen::MatrixXd& q)
    : LinearClosedLoopPlant(a, b), q_(q) {
  p_ = solve_lyapunov(a_, q_);
}

double LinearPlant::feedforward(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                                const Eigen::VectorXd&, const Eigen::VectorXd& rho,
                                const ActiveSet& active,
                                const std::vector<PolytopicConstraint>& constraints,
                                const QuadraticForm& form, double nu_max) const {
  return nu_linear(x, g, rho, *this, constraints, form, active, nu_max);
}

double nu_linear(const Eigen::VectorXd& x, const Eigen::VectorXd& g, const Eigen::VectorXd& rho,
                 const LinearPlant& plant, const std::vector<PolytopicConstraint>& constraints,
                 const QuadraticForm& form, const ActiveSet& active, double nu_max) {
  const Eigen::VectorXd x_g = plant.steady_state(g);
  const Eigen::VectorXd xt = x - x_g;
  const double numerator = 0.5 * xt.dot(plant.q() * xt);
  const Eigen::VectorXd ainvb_rho = plant.ainv_b() * rho;
  const double xt_p_term = xt.dot(form.matrix() * ainvb_rho);

  double best = std::numeric_limits<double>::infinity();
  for (int i : active.indices) {
    const PolytopicConstraint& c = constraints[static_cast<std::size_t>(i)];
    const Eigen::VectorXd csum = c.c_x + c.c_g;
    const double slack = csum.dot(x_g) + c.d;
    const double beta = slack / c.c_x.dot(form.solve(c.c_x));
    const double denom = xt_p_term + beta * csum.dot(ainvb_rho);
    if (denom > 0.0) best = std::min(best, numerator / denom);
  }
  if (!std::isfinite(best)) return nu_max;
  return std::clamp(std::max(0.0, best), 0.0, nu_max);
}

RobotPlant::RobotPlant(int joints, MassFn mass, CoriolisFn coriolis, GravityFn gravity,
                       const Eigen::VectorXd& kp, const Eigen::VectorXd& kd, int mass_grid)
    : joints_(joints),
      mass_(std::move(mass)),
      coriolis_(std::move(coriolis)),
      gravity_(std::move(gravity)),
      kp_(kp),
      kd_(kd) {
  if (joints_ <= 0) throw std::invalid_argument("joint count must be positive");
  if (kp_.size() != joints_ || kd_.size() != joints_) {
    throw std::invalid_argument("gain dimensions must match joint count");
  }
  if (kp_.minCoeff() <= 0.0 || kd_.minCoeff() <= 0.0) {
    throw std::invalid_argument("PD gains must be strictly positive");
  }
  m_lower_ = mass_lower_bound(mass_, joints_, mass_grid);

  p_ = Eigen::MatrixXd::Zero(2 * joints_, 2 * joints_);
  p_.topLeftCorner(joints_, joints_) = 0.5 * kp_.asDiagonal().toDenseMatrix();
  p_.bottomRightCorner(joints_, joints_) = 0.5 * m_lower_;
}

Eigen::VectorXd RobotPlant::dynamics(const Eigen::VectorXd& x, const Eigen::VectorXd& g) const {
  return robot_dynamics(x.head(joints_), x.tail(joints_), g, *this);
}

Eigen::VectorXd RobotPlant::steady_state(const Eigen::VectorXd& g) const {
  Eigen::VectorXd xg = Eigen::VectorXd::Zero(2 * joints_);
  xg.head(joints_) = g;
  return xg;
}

Eigen::MatrixXd RobotPlant::steady_state_jacobian(const Eigen::VectorXd&) const {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(2 * joints_, joints_);
  j.topRows(joints_).setIdentity();
  return j;
}

double RobotPlant::lyapunov_value(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                                  const QuadraticForm&) const {
  const Eigen::VectorXd q = x.head(joints_);
  const Eigen::VectorXd qd = x.tail(joints_);
  const Eigen::VectorXd qerr = q - g;
  return 0.5 * qerr.dot(kp_.asDiagonal() * qerr) + 0.5 * qd.dot(mass_(q) * qd);
}

double RobotPlant::feedforward(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                               const Eigen::VectorXd&, const Eigen::VectorXd& rho,
                               const ActiveSet& active,
                               const std::vector<PolytopicConstraint>& constraints,
                               const QuadraticForm&, double nu_max) const {
  return nu_robot(x, g, rho, *this, constraints, active, nu_max);
}

Eigen::VectorXd robot_dynamics(const Eigen::VectorXd& q, const Eigen::VectorXd& q_dot,
                               const Eigen::VectorXd& g, const RobotPlant& plant) {
  const int n = plant.joints();
  const Eigen::MatrixXd m = plant.mass(q);
  const Eigen::MatrixXd c = plant.coriolis(q, q_dot);
  const Eigen::VectorXd torque =
      -c * q_dot - plant.kp().asDiagonal() * (q - g) - plant.kd().asDiagonal() * q_dot;
  Eigen::VectorXd out(2 * n);
  out.head(n) = q_dot;
  out.tail(n) = m.llt().solve(torque);
  return out;
}

Eigen::MatrixXd mass_lower_bound(const RobotPlant::MassFn& mass, int joints, int grid_size) {
  if (grid_size < 360) throw std::invalid_argument("mass bound grid must have at least 360 points");

  // Only joints the inertia actually depends on need gridding.
  const Eigen::VectorXd q0 = Eigen::VectorXd::Zero(joints);
  const Eigen::MatrixXd m0 = mass(q0);
  std::vector<int> shape_joints;
  for (int j = 0; j < joints; ++j) {
    for (int k = 1; k <= 8; ++k) {
      Eigen::VectorXd q = q0;
      q[j] = -M_PI + 2.0 * M_PI * k / 9.0;
      if ((mass(q) - m0).cwiseAbs().maxCoeff() > 1e-12) {
        shape_joints.push_back(j);
        break;
      }
    }
  }

  double lambda_min = std::numeric_limits<double>::infinity();
  Eigen::VectorXd q = q0;
  const std::size_t cells = shape_joints.empty() ? 1 : shape_joints.size();
  std::vector<int> idx(cells, 0);
  const auto eval = [&](const Eigen::VectorXd& point) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mass(point), Eigen::EigenvaluesOnly);
    lambda_min = std::min(lambda_min, es.eigenvalues().minCoeff());
  };
  if (shape_joints.empty()) {
    eval(q0);
  } else {
    // Cartesian sweep over the shape joints, grid_size points per joint.
    std::size_t total = 1;
    for (std::size_t i = 0; i < shape_joints.size(); ++i) total *= static_cast<std::size_t>(grid_size);
    for (std::size_t flat = 0; flat < total; ++flat) {
      std::size_t rem = flat;
      for (std::size_t i = 0; i < shape_joints.size(); ++i) {
        const int step = static_cast<int>(rem % static_cast<std::size_t>(grid_size));
        rem /= static_cast<std::size_t>(grid_size);
        q[shape_joints[i]] = -M_PI + 2.0 * M_PI * step / (grid_size - 1);
      }
      eval(q);
    }
  }

  if (!(lambda_min > 0.0)) throw std::runtime_error("inertia model invalid");
  const int n = static_cast<int>(m0.rows());
  return lambda_min * (1.0 - 1e-6) * Eigen::MatrixXd::Identity(n, n);
}

Eigen::MatrixXd mass_lower_bound(const RobotPlant& plant, int grid_size) {
  return mass_lower_bound([&plant](const Eigen::VectorXd& q) { return plant.mass(q); },
                          plant.joints(), grid_size);
}

double nu_robot(const Eigen::VectorXd& x, const Eigen::VectorXd& g, const Eigen::VectorXd& rho,
                const RobotPlant& plant, const std::vector<PolytopicConstraint>& constraints,
                const ActiveSet& active, double nu_max) {
  const int n = plant.joints();
  const Eigen::VectorXd q = x.head(n);
  const Eigen::VectorXd qd = x.tail(n);
  const double numerator = qd.dot(plant.kd().asDiagonal() * qd);
  const double tracking_term = (q - g).dot(plant.kp().asDiagonal() * rho);
  const QuadraticForm form = plant.lyapunov_form();

  // Vdot <= Gammadot_i with Gammadot_i = +2 beta_i c_Ri'rho nu (the
  // steady-state Jacobian is [I; 0], so the threshold grows when the command
  // moves away from constraint i). Indices whose denominator is nonpositive
  // impose no bound on nu >= 0.
  double best = std::numeric_limits<double>::infinity();
  for (int i : active.indices) {
    const PolytopicConstraint& c = constraints[static_cast<std::size_t>(i)];
    const Eigen::VectorXd c_r = (c.c_x + c.c_g).head(n);
    const double slack = c_r.dot(g) + c.d;
    const double denom =
        -2.0 * slack / c.c_x.dot(form.solve(c.c_x)) * c_r.dot(rho) - tracking_term;
    if (denom > 0.0) best = std::min(best, numerator / denom);
  }
  if (!std::isfinite(best)) return nu_max;
  return std::clamp(std::max(0.0, best), 0.0, nu_max);
}

TwoLinkMatrices two_link_matrices(const Eigen::VectorXd& q, const Eigen::VectorXd& q_dot,
                                  const TwoLinkParams& p) {
  const double base_inertia =
      p.iz1 + p.iz2 + p.m1 * p.r1 * p.r1 + p.m2 * (p.l1 * p.l1 + p.r2 * p.r2);
  const double distal_inertia = p.iz2 + p.m2 * p.r2 * p.r2;
  const double coupling = p.m2 * p.l1 * p.r2;

  const double c2 = std::cos(q[1]);
  const double s2 = std::sin(q[1]);

  TwoLinkMatrices out;
  out.m << base_inertia + 2.0 * coupling * c2, distal_inertia + coupling * c2,
      distal_inertia + coupling * c2, distal_inertia;
  out.c << -coupling * s2 * q_dot[1], -coupling * s2 * (q_dot[0] + q_dot[1]),
      coupling * s2 * q_dot[0], 0.0;
  out.g << p.gravity * ((p.m1 * p.r1 + p.m2 * p.l1) * std::cos(q[0]) +
                        p.m2 * p.r2 * std::cos(q[0] + q[1])),
      p.gravity * p.m2 * p.r2 * std::cos(q[0] + q[1]);
  return out;
}

RobotPlant make_two_link_arm(const TwoLinkParams& params, const Eigen::VectorXd& kp,
                             const Eigen::VectorXd& kd, int mass_grid) {
  auto mass = [params](const Eigen::VectorXd& q) -> Eigen::MatrixXd {
    return two_link_matrices(q, Eigen::VectorXd::Zero(2), params).m;
  };
  auto coriolis = [params](const Eigen::VectorXd& q, const Eigen::VectorXd& qd) -> Eigen::MatrixXd {
    return two_link_matrices(q, qd, params).c;
  };
  auto gravity = [params](const Eigen::VectorXd& q) -> Eigen::VectorXd {
    return two_link_matrices(q, Eigen::VectorXd::Zero(2), params).g;
  };
  return RobotPlant(2, mass, coriolis, gravity, kp, kd, mass_grid);
}

}  // namespace erg
