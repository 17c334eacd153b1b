#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "erg/errors.hpp"
#include "erg/scenarios.hpp"
#include "erg/simulation.hpp"

using namespace erg;

TEST_CASE("double integrator structure") {
  const Scenario s = build_scenario("double_integrator");
  CHECK(s.constraints.size() == 4);
  CHECK(s.plant->state_dim() == 2);
  CHECK(s.plant->reference_dim() == 1);
  CHECK(s.erg.kappa == doctest::Approx(100.0));
  CHECK(s.erg.eps1 == doctest::Approx(1e-3));
  CHECK(s.erg.eps2 == doctest::Approx(1e-3));

  // Lyapunov solution for Q = I is half of the Q = 2I matrix.
  const auto plant = std::dynamic_pointer_cast<const LinearPlant>(s.plant);
  REQUIRE(plant);
  Eigen::Matrix2d half;
  half << 12.705 / 2.0, 0.005, 0.005, 0.12625 / 2.0;
  CHECK((plant->p() - half).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("two-link arm structure and gravity bounds") {
  const Scenario s = build_scenario("two_link_arm");
  CHECK(s.constraints.size() == 8);
  CHECK(s.plant->state_dim() == 4);
  CHECK(s.plant->reference_dim() == 2);

  const TwoLinkParams p;
  const double q1_min = 2.0 * M_PI / 9.0;
  const double q1_max = 7.0 * M_PI / 9.0;
  const double q2_min = -M_PI;
  const double q2_max = -M_PI / 4.0;

  // d5/d6 keep the corner-formula bound (it is the true maximum of G1);
  // d7/d8 must exceed the paper corner value because the true maximum of G2
  // sits strictly inside the admissible box.
  const double g1_corner =
      p.gravity * ((p.m1 * p.r1 + p.m2 * p.l1) * std::cos(q1_min) +
                   p.m2 * p.r2 * std::cos(q1_min + q2_max));
  const double g2_corner = p.gravity * p.m2 * p.r2 * std::cos(q1_min + q2_max);
  CHECK(s.constraints[4].d == doctest::Approx(35.0 - g1_corner).epsilon(1e-9));
  CHECK(s.constraints[6].d < 25.0 - g2_corner);
  CHECK(s.constraints[6].d == doctest::Approx(25.0 - p.gravity * p.m2 * p.r2).epsilon(1e-5));

  // The bounds dominate gravity over the whole admissible box.
  auto gvec = [&p](double q1, double q2) {
    Eigen::VectorXd q(2);
    q << q1, q2;
    return two_link_matrices(q, Eigen::VectorXd::Zero(2), p).g;
  };
  const double g1_bound = 35.0 - s.constraints[4].d;
  const double g2_bound = 25.0 - s.constraints[6].d;
  for (int i = 0; i <= 360; ++i) {
    for (int j = 0; j <= 360; ++j) {
      const double q1 = q1_min + (q1_max - q1_min) * i / 360.0;
      const double q2 = q2_min + (q2_max - q2_min) * j / 360.0;
      const Eigen::Vector2d grav = gvec(q1, q2);
      REQUIRE(grav[0] <= g1_bound);
      REQUIRE(grav[1] <= g2_bound);
    }
  }
}

TEST_CASE("inverted pendulum closed loop") {
  const Scenario s = build_scenario("inverted_pendulum");
  CHECK(s.constraints.size() == 2);

  const auto plant = std::dynamic_pointer_cast<const LinearClosedLoopPlant>(s.plant);
  REQUIRE(plant);
  const Eigen::EigenSolver<Eigen::MatrixXd> es(plant->a(), false);
  CHECK(es.eigenvalues().real().maxCoeff() < 0.0);

  // Steady state is the pure cart-position channel.
  const Eigen::VectorXd xg = plant->steady_state(Eigen::VectorXd::Constant(1, 0.7));
  CHECK(xg[0] == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(xg.tail(3).cwiseAbs().maxCoeff() <= 1e-12);

  // Both theta constraints sit exactly at the paper's threshold level.
  for (const PolytopicConstraint& c : s.constraints) {
    CHECK(gamma_i(c, *s.form, xg) == doctest::Approx(210.0).epsilon(1e-9));
  }
}

TEST_CASE("plant invariants: equilibrium consistency and steady-state Jacobian") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> gauss(0.0, 0.4);
  for (const std::string& name : builtin_scenario_names()) {
    const Scenario s = build_scenario(name);
    const int m = s.plant->reference_dim();
    for (int k = 0; k < 10; ++k) {
      Eigen::VectorXd g = s.g0;
      for (int j = 0; j < m; ++j) g[j] += gauss(rng);
      CHECK(s.plant->dynamics(s.plant->steady_state(g), g).norm() <= 1e-9);

      const Eigen::MatrixXd jac = s.plant->steady_state_jacobian(g);
      const double h = 1e-6;
      for (int j = 0; j < m; ++j) {
        Eigen::VectorXd gp = g, gm = g;
        gp[j] += h;
        gm[j] -= h;
        const Eigen::VectorXd fd =
            (s.plant->steady_state(gp) - s.plant->steady_state(gm)) / (2.0 * h);
        CHECK((jac.col(j) - fd).norm() <= 1e-6 * std::max(1.0, fd.norm()));
      }
    }
  }
}

TEST_CASE("structural Jacobians of the two families") {
  const Scenario di = build_scenario("double_integrator");
  const auto lin = std::dynamic_pointer_cast<const LinearPlant>(di.plant);
  const Eigen::MatrixXd expected = -lin->ainv_b();
  CHECK((lin->steady_state_jacobian(Eigen::VectorXd::Zero(1)) - expected).norm() <= 1e-14);

  const Scenario arm = build_scenario("two_link_arm");
  Eigen::MatrixXd stacked(4, 2);
  stacked << Eigen::Matrix2d::Identity(), Eigen::Matrix2d::Zero();
  CHECK((arm.plant->steady_state_jacobian(arm.g0) - stacked).norm() == 0.0);
}

TEST_CASE("arm Lyapunov function is nonincreasing for a held command") {
  const Scenario s = build_scenario("two_link_arm");
  Eigen::VectorXd g(2), x0(4);
  g << 1.3, -1.2;
  x0 << 1.7, -0.8, 0.0, 0.0;
  const double dt = 1e-3;
  const auto states = integrate_fixed_reference(*s.plant, x0, g, dt, 4000);
  double prev = s.plant->lyapunov_value(states.front(), g, *s.form);
  for (std::size_t k = 1; k < states.size(); ++k) {
    const double v = s.plant->lyapunov_value(states[k], g, *s.form);
    CHECK(v <= prev + 1e-6 * std::max(1.0, prev));
    prev = v;
  }
}

TEST_CASE("override application and validation") {
  const OverrideConfig ov = OverrideConfig::parse_string(
      "# tighter bounds and a custom program\n"
      "[constraints]\n"
      "x_max = 0.5\n"
      "[erg]\n"
      "kappa = 50\n"
      "[simulation]\n"
      "duration = 2.5\n"
      "[reference]\n"
      "at = 0 0.2\n"
      "at = 1.0 0.4\n");
  const Scenario s = build_scenario("double_integrator", ov);
  CHECK(s.erg.kappa == doctest::Approx(50.0));
  CHECK(s.duration == doctest::Approx(2.5));
  CHECK(s.constraints[0].d == doctest::Approx(0.5));
  REQUIRE(s.reference.size() == 2);
  CHECK(s.reference[1].time == doctest::Approx(1.0));
  CHECK(s.reference_at(0.5)[0] == doctest::Approx(0.2));
  CHECK(s.reference_at(1.5)[0] == doctest::Approx(0.4));

  CHECK_THROWS_AS(
      build_scenario("double_integrator",
                     OverrideConfig::parse_string("[plant]\nbogus_key = 1\n")),
      ScenarioError);
  CHECK_THROWS_AS(build_scenario("no_such_scenario"), ScenarioError);

  // Initialization check: starting state outside the admissible level set.
  const OverrideConfig bad_x0 = OverrideConfig::parse_string("[initial]\nx0 = 0.99 0\n");
  Scenario s2 = build_scenario("double_integrator", bad_x0);
  s2.governor = GovernorKind::erg;
  CHECK_THROWS_AS(s2.validate(), InitializationError);

  // Reference programs must start at zero and increase.
  const OverrideConfig bad_ref =
      OverrideConfig::parse_string("[reference]\nat = 0.5 0.2\n");
  Scenario s3 = build_scenario("double_integrator", bad_ref);
  CHECK_THROWS_AS(s3.validate(), ScenarioError);
}

TEST_CASE("scenario hash tracks definition changes") {
  const Scenario a = build_scenario("double_integrator");
  Scenario b = build_scenario("double_integrator");
  CHECK(a.hash() == b.hash());
  b.duration = 5.0;
  CHECK(a.hash() != b.hash());
}
