#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "erg/oracles.hpp"
#include "erg/plants.hpp"
#include "erg/scenarios.hpp"

using namespace erg;

namespace {

Eigen::VectorXd vec1(double a) { return Eigen::VectorXd::Constant(1, a); }

Eigen::Matrix2d di_a(double kp, double kd) {
  Eigen::Matrix2d a;
  a << 0.0, 1.0, -kp, -kd;
  return a;
}

}  // namespace

TEST_CASE("solve_lyapunov basics") {
  const Eigen::Matrix2d p =
      solve_lyapunov(-Eigen::Matrix2d::Identity(), 2.0 * Eigen::Matrix2d::Identity());
  CHECK((p - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() <= 1e-12);

  // PD-compensated double integrator with kp=100, kd=8 and Q = 2I.
  const Eigen::MatrixXd pd = solve_lyapunov(di_a(100.0, 8.0), 2.0 * Eigen::Matrix2d::Identity());
  Eigen::Matrix2d expected;
  expected << 12.705, 0.01, 0.01, 0.12625;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(pd(i, j) == doctest::Approx(expected(i, j)).epsilon(1e-12));

  std::mt19937_64 rng(3);
  const Eigen::MatrixXd a = oracles::random_hurwitz(4, rng);
  const Eigen::MatrixXd q = oracles::random_spd(4, rng);
  const Eigen::MatrixXd p4 = solve_lyapunov(a, q);
  CHECK((a.transpose() * p4 + p4 * a + q).norm() <= 1e-9 * q.norm());

  Eigen::Matrix2d unstable;
  unstable << 1.0, 0.0, 0.0, -1.0;
  CHECK_THROWS_WITH_AS(solve_lyapunov(unstable, Eigen::Matrix2d::Identity()),
                       "unstable closed loop", std::invalid_argument);
}

TEST_CASE("linear_steady_state") {
  const Eigen::Matrix2d a = di_a(100.0, 8.0);
  Eigen::MatrixXd b(2, 1);
  b << 0.0, 100.0;
  CHECK(linear_steady_state(a, b, vec1(0.0)).norm() == 0.0);

  // x_g = (g, 0) for the PD loop.
  for (double g : {-0.7, 0.3, 1.2}) {
    const Eigen::VectorXd xg = linear_steady_state(a, b, vec1(g));
    CHECK(xg[0] == doctest::Approx(g).epsilon(1e-14));
    CHECK(std::abs(xg[1]) <= 1e-14);
  }

  std::mt19937_64 rng(4);
  const Eigen::MatrixXd ar = oracles::random_hurwitz(5, rng);
  Eigen::MatrixXd br(5, 2);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 2; ++j) br(i, j) = gauss(rng);
  Eigen::VectorXd g(2);
  g << 0.4, -1.1;
  const Eigen::VectorXd xg = linear_steady_state(ar, br, g);
  CHECK((ar * xg + br * g).norm() <= 1e-10);
}

TEST_CASE("nu_linear trivial cases") {
  // Wide torque bounds leave the position walls active, so moving right is
  // bounded by the right wall and the bound degrades gracefully.
  OverrideConfig ov = OverrideConfig::parse_string("[constraints]\nx_max = 0.3\nu_max = 100\n");
  const Scenario s = build_scenario("double_integrator", ov);
  const auto plant = std::dynamic_pointer_cast<const LinearPlant>(s.plant);
  REQUIRE(plant);

  const Eigen::VectorXd g = vec1(0.0);
  const Eigen::VectorXd x_g = plant->steady_state(g);
  const ActiveSet active = gamma_active_set(s.constraints, *s.form, x_g, 1e-9);

  // x = x_g: numerator vanishes while the right wall still bounds.
  CHECK(nu_linear(x_g, g, vec1(1.0), *plant, s.constraints, *s.form, active, 1e6) ==
        doctest::Approx(0.0));

  // All denominators nonpositive: no active constraint limits a retreat from
  // the right wall, so the cap is returned.
  const Eigen::VectorXd g_right = vec1(0.2);
  const Eigen::VectorXd xg_right = plant->steady_state(g_right);
  std::vector<PolytopicConstraint> right_wall = {s.constraints[1]};
  const ActiveSet only_right = gamma_active_set(right_wall, *s.form, xg_right, 1e-9);
  CHECK(nu_linear(xg_right, g_right, vec1(-1.0), *plant, right_wall, *s.form, only_right, 123.0) ==
        doctest::Approx(123.0));
}

TEST_CASE("robot_dynamics equilibrium and PD response") {
  const Scenario s = build_scenario("two_link_arm");
  const auto arm = std::dynamic_pointer_cast<const RobotPlant>(s.plant);
  REQUIRE(arm);

  Eigen::VectorXd g(2);
  g << 1.2, -0.9;
  const Eigen::VectorXd rest = robot_dynamics(g, Eigen::VectorXd::Zero(2), g, *arm);
  CHECK(rest.norm() <= 1e-12);

  // With qdot = 0 the Coriolis term drops out: qddot = -M^{-1} K_P (q - g).
  Eigen::VectorXd q(2);
  q << 1.4, -1.1;
  const Eigen::VectorXd deriv = robot_dynamics(q, Eigen::VectorXd::Zero(2), g, *arm);
  const Eigen::VectorXd expected =
      -arm->mass(q).llt().solve(arm->kp().asDiagonal() * (q - g));
  CHECK((deriv.tail(2) - expected).norm() <= 1e-12);
  CHECK(deriv.head(2).norm() == 0.0);
}

TEST_CASE("two-link matrices match the independently recomputed coefficients") {
  const TwoLinkParams p;
  // Recomputed from the physical parameters, not from the implementation.
  const double iz1 = p.m1 * p.l1 * p.l1 / 12.0;
  const double iz2 = p.m2 * p.l2 * p.l2 / 12.0;
  const double mu1 = iz1 + iz2 + p.m1 * p.r1 * p.r1 + p.m2 * (p.l1 * p.l1 + p.r2 * p.r2);
  const double mu2 = iz2 + p.m2 * p.r2 * p.r2;
  const double coupling = p.m2 * p.l1 * p.r2;
  CHECK(mu1 == doctest::Approx(0.7833333333333333).epsilon(1e-12));
  CHECK(mu2 == doctest::Approx(0.09).epsilon(1e-12));
  CHECK(coupling == doctest::Approx(0.18).epsilon(1e-12));

  Eigen::VectorXd q(2), qd(2);
  q << 0.4, M_PI / 2.0;
  qd << 0.0, 0.0;
  const TwoLinkMatrices m = two_link_matrices(q, qd, p);
  CHECK(m.m(0, 1) == doctest::Approx(mu2).epsilon(1e-12));  // cos(q2) = 0
  CHECK(m.m(1, 0) == doctest::Approx(mu2).epsilon(1e-12));
  CHECK(m.m(1, 1) == doctest::Approx(mu2).epsilon(1e-12));
  CHECK(m.m(0, 0) == doctest::Approx(mu1).epsilon(1e-10));
}

TEST_CASE("Mdot - 2C is skew symmetric (finite-difference Mdot)") {
  const TwoLinkParams params;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> angle(-M_PI, M_PI);
  std::normal_distribution<double> vel(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    Eigen::VectorXd q(2), qd(2);
    q << angle(rng), angle(rng);
    qd << vel(rng), vel(rng);
    const double h = 1e-5;
    const Eigen::MatrixXd mp = two_link_matrices(q + h * qd, qd, params).m;
    const Eigen::MatrixXd mm = two_link_matrices(q - h * qd, qd, params).m;
    const Eigen::MatrixXd mdot = (mp - mm) / (2.0 * h);
    const Eigen::MatrixXd s = mdot - 2.0 * two_link_matrices(q, qd, params).c;
    CHECK((s + s.transpose()).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("closed-loop energy balance of the arm") {
  const Scenario s = build_scenario("two_link_arm");
  const auto arm = std::dynamic_pointer_cast<const RobotPlant>(s.plant);
  Eigen::VectorXd g(2), x0(4);
  g << M_PI / 2.0, -M_PI / 2.0;
  x0 << g[0] + 0.3, g[1] - 0.25, 0.1, -0.1;
  const double dt = 1e-5;
  const auto segment = integrate_fixed_reference(*arm, x0, g, dt, 60);
  const auto energy = [&](const Eigen::VectorXd& xs) {
    return arm->lyapunov_value(xs, g, *s.form);
  };
  const auto fd = oracles::finite_difference_vdot(energy, segment, dt);
  for (std::size_t k = 0; k < fd.size(); ++k) {
    const Eigen::VectorXd qd = segment[k + 1].tail(2);
    const double expected = -qd.dot(arm->kd().asDiagonal() * qd);
    CHECK(fd[k] == doctest::Approx(expected).epsilon(1e-6));
  }
}

TEST_CASE("mass_lower_bound") {
  // Constant inertia: the bound is the scaled smallest eigenvalue.
  Eigen::Matrix2d m0;
  m0 << 2.0, 0.3, 0.3, 1.0;
  const auto const_mass = [m0](const Eigen::VectorXd&) -> Eigen::MatrixXd { return m0; };
  const Eigen::MatrixXd bound = mass_lower_bound(const_mass, 2, 361);
  const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(m0).eigenvalues().minCoeff();
  CHECK(bound(0, 0) == doctest::Approx(lmin * (1.0 - 1e-6)).epsilon(1e-12));
  CHECK(bound(0, 1) == 0.0);

  CHECK_THROWS_AS(mass_lower_bound(const_mass, 2, 100), std::invalid_argument);

  // Two-link arm: grid minimum is stable under 10x refinement and the gap
  // M(q) - M_lower stays PSD at random configurations.
  const Scenario s = build_scenario("two_link_arm");
  const auto arm = std::dynamic_pointer_cast<const RobotPlant>(s.plant);
  const double coarse = mass_lower_bound(*arm, 361)(0, 0);
  const double fine = mass_lower_bound(*arm, 3601)(0, 0);
  CHECK(coarse == doctest::Approx(fine).epsilon(1e-3));

  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> angle(-M_PI, M_PI);
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 10000; ++k) {
    Eigen::VectorXd q(2);
    q << angle(rng), angle(rng);
    const Eigen::MatrixXd gap = arm->mass(q) - arm->mass_bound();
    worst = std::min(worst,
                     Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gap).eigenvalues().minCoeff());
  }
  CHECK(worst >= -1e-10);
}

TEST_CASE("nu_robot trivial cases") {
  const Scenario s = build_scenario("two_link_arm");
  const auto arm = std::dynamic_pointer_cast<const RobotPlant>(s.plant);

  // Command near the q2 upper wall so that wall alone is active.
  Eigen::VectorXd g(2);
  g << 1.5, -M_PI / 4.0 - 0.05;
  const Eigen::VectorXd x_g = arm->steady_state(g);
  const ActiveSet active = gamma_active_set(s.constraints, *s.form, x_g, 1e-9);
  REQUIRE(active.indices == std::vector<int>{3});

  Eigen::VectorXd rho_toward(2);
  rho_toward << 0.0, 1.0;  // toward the q2 upper wall: its threshold shrinks
  Eigen::VectorXd rho_away(2);
  rho_away << 0.0, -1.0;
  // At rest the numerator vanishes, so a binding direction pins nu to zero.
  CHECK(nu_robot(x_g, g, rho_toward, *arm, s.constraints, active, 1e6) == doctest::Approx(0.0));
  // Away from the wall the active threshold grows: no bound, cap wins.
  CHECK(nu_robot(x_g, g, rho_away, *arm, s.constraints, active, 77.0) == doctest::Approx(77.0));
}

TEST_CASE("quadratic kinetic lower bound holds at random states") {
  const Scenario s = build_scenario("two_link_arm");
  const auto arm = std::dynamic_pointer_cast<const RobotPlant>(s.plant);
  const Eigen::MatrixXd m_lower = arm->mass_bound();
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> angle(-M_PI, M_PI);
  std::normal_distribution<double> vel(0.0, 2.0);
  for (int k = 0; k < 10000; ++k) {
    Eigen::VectorXd q(2), qd(2);
    q << angle(rng), angle(rng);
    qd << vel(rng), vel(rng);
    CHECK(0.5 * qd.dot(m_lower * qd) <= 0.5 * qd.dot(arm->mass(q) * qd) + 1e-12);
  }
}
