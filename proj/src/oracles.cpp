#include "erg/oracles.hpp"

#include <cmath>

#include "erg/scenarios.hpp"
#include "erg/simulation.hpp"

namespace erg::oracles {

namespace {

std::string tag(const std::string& base, int k) { return base + "[" + std::to_string(k) + "]"; }

Eigen::VectorXd random_unit(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd v(n);
  do {
    for (int i = 0; i < n; ++i) v[i] = gauss(rng);
  } while (v.norm() < 1e-6);
  return v / v.norm();
}

Eigen::VectorXd random_gaussian(int n, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, scale);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = gauss(rng);
  return v;
}

/// Central difference of a scalar function of the stacked flow (x, g) with
/// xdot = plant dynamics and gdot held at rho*nu.
double flow_fd(const PlantModel& plant, const Eigen::VectorXd& x, const Eigen::VectorXd& g,
               const Eigen::VectorXd& rho, double nu,
               const std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>& value,
               double h) {
  const int n = plant.state_dim();
  const int m = plant.reference_dim();
  Eigen::VectorXd y(n + m);
  y.head(n) = x;
  y.tail(m) = g;
  const DerivativeFn f = [&](double, const Eigen::VectorXd& state) {
    Eigen::VectorXd out(n + m);
    out.head(n) = plant.dynamics(state.head(n), state.tail(m));
    out.tail(m) = rho * nu;
    return out;
  };
  const Eigen::VectorXd fwd = rk4_step(f, y, 0.0, h);
  // One RK4 step with negative dt integrates the reversed flow.
  const Eigen::VectorXd k1 = f(0.0, y);
  const Eigen::VectorXd k2 = f(0.0, y - 0.5 * h * k1);
  const Eigen::VectorXd k3 = f(0.0, y - 0.5 * h * k2);
  const Eigen::VectorXd k4 = f(0.0, y - h * k3);
  const Eigen::VectorXd bwd = y - (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  return (value(fwd.head(n), fwd.tail(m)) - value(bwd.head(n), bwd.tail(m))) / (2.0 * h);
}

}  // namespace

OracleReport make_report(std::string name, double computed, double reference, double tol_abs,
                         double tol_rel) {
  OracleReport r;
  r.name = std::move(name);
  r.computed = computed;
  r.reference = reference;
  r.abs_err = std::abs(computed - reference);
  const double denom = std::max(std::abs(computed), std::abs(reference));
  r.rel_err = denom > 0.0 ? r.abs_err / denom : 0.0;
  r.tol_abs = tol_abs;
  r.tol_rel = tol_rel;
  r.pass = r.abs_err <= tol_abs || r.rel_err <= tol_rel;
  return r;
}

double min_v_on_hyperplane_kkt(const QuadraticForm& form, const PolytopicConstraint& constraint,
                               const Eigen::VectorXd& x_g) {
  const int n = form.dim();
  const double slack = (constraint.c_x + constraint.c_g).dot(x_g) + constraint.d;
  Eigen::MatrixXd kkt(n + 1, n + 1);
  kkt.setZero();
  kkt.topLeftCorner(n, n) = 2.0 * form.matrix();
  kkt.topRightCorner(n, 1) = constraint.c_x;
  kkt.bottomLeftCorner(1, n) = constraint.c_x.transpose();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
  rhs[n] = -slack;
  const Eigen::VectorXd sol = kkt.fullPivLu().solve(rhs);
  if (!sol.allFinite()) throw std::runtime_error("KKT solve failed");
  const Eigen::VectorXd xt = sol.head(n);
  return xt.dot(form.matrix() * xt);
}

double min_v_on_hyperplane_multistart(const QuadraticForm& form,
                                      const PolytopicConstraint& constraint,
                                      const Eigen::VectorXd& x_g, std::mt19937_64& rng, int starts,
                                      int iterations) {
  const int n = form.dim();
  const double slack = (constraint.c_x + constraint.c_g).dot(x_g) + constraint.d;
  const Eigen::VectorXd& cx = constraint.c_x;
  const double cx_sq = cx.squaredNorm();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(form.matrix(), Eigen::EigenvaluesOnly);
  const double step = 1.0 / (2.0 * es.eigenvalues().maxCoeff());

  const auto project = [&](Eigen::VectorXd v) {
    return v - ((cx.dot(v) + slack) / cx_sq) * cx;
  };

  double best = std::numeric_limits<double>::infinity();
  for (int s = 0; s < starts; ++s) {
    Eigen::VectorXd xt = project(random_gaussian(n, 2.0, rng));
    for (int it = 0; it < iterations; ++it) {
      xt = project(xt - step * 2.0 * (form.matrix() * xt));
    }
    best = std::min(best, xt.dot(form.matrix() * xt));
  }
  return best;
}

std::vector<double> finite_difference_vdot(
    const std::function<double(const Eigen::VectorXd&)>& v,
    const std::vector<Eigen::VectorXd>& segment, double dt) {
  std::vector<double> out;
  if (segment.size() < 3) return out;
  out.reserve(segment.size() - 2);
  for (std::size_t k = 1; k + 1 < segment.size(); ++k) {
    out.push_back((v(segment[k + 1]) - v(segment[k - 1])) / (2.0 * dt));
  }
  return out;
}

PsdGridResult psd_grid_check(const std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>& s,
                             const std::vector<Eigen::VectorXd>& grid) {
  PsdGridResult result;
  result.worst_eigenvalue = std::numeric_limits<double>::infinity();
  for (const Eigen::VectorXd& q : grid) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s(q), Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    if (lmin < result.worst_eigenvalue) {
      result.worst_eigenvalue = lmin;
      result.worst_point = q;
    }
  }
  result.pass = result.worst_eigenvalue >= -1e-10;
  return result;
}

Eigen::MatrixXd random_spd(int n, std::mt19937_64& rng, double eig_min, double eig_max) {
  std::uniform_real_distribution<double> eig(eig_min, eig_max);
  Eigen::MatrixXd gauss(n, n);
  std::normal_distribution<double> g01(0.0, 1.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) gauss(i, j) = g01(rng);
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(gauss).householderQ();
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) d[i] = eig(rng);
  Eigen::MatrixXd p = q * d.asDiagonal() * q.transpose();
  return 0.5 * (p + p.transpose().eval());
}

Eigen::MatrixXd random_hurwitz(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g01(0.0, 1.0);
  std::uniform_real_distribution<double> shift(0.2, 1.0);
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g01(rng);
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
  const double max_real = es.eigenvalues().real().maxCoeff();
  return a - (max_real + shift(rng)) * Eigen::MatrixXd::Identity(n, n);
}

std::vector<OracleReport> gamma_formula_campaign(std::uint64_t seed, int count,
                                                 const GammaFn& gamma_impl) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> slack_dist(0.1, 3.0);
  std::vector<OracleReport> reports;
  for (int k = 0; k < count; ++k) {
    const int n = 2 + k % 5;
    const QuadraticForm form(random_spd(n, rng));
    PolytopicConstraint c;
    c.c_x = random_unit(n, rng) * (0.5 + slack_dist(rng));
    c.c_g = random_gaussian(n, 0.5, rng);
    const Eigen::VectorXd x_g = random_gaussian(n, 1.0, rng);
    c.d = slack_dist(rng) - (c.c_x + c.c_g).dot(x_g);

    const double gamma = gamma_impl(c, form, x_g);
    const double kkt = min_v_on_hyperplane_kkt(form, c, x_g);
    reports.push_back(make_report(tag("gamma_vs_hyperplane", k), gamma, kkt, 0.0, 1e-8));
    const double ms = min_v_on_hyperplane_multistart(form, c, x_g, rng);
    reports.push_back(make_report(tag("kkt_vs_multistart", k), kkt, ms, 1e-12, 1e-8));
  }
  return reports;
}

std::vector<OracleReport> gamma_formula_campaign(std::uint64_t seed, int count) {
  return gamma_formula_campaign(
      seed, count,
      [](const PolytopicConstraint& c, const QuadraticForm& f, const Eigen::VectorXd& xg) {
        return gamma_i(c, f, xg);
      });
}

std::vector<OracleReport> lyapunov_residual_campaign(std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<OracleReport> reports;
  for (int k = 0; k < count; ++k) {
    const int n = 2 + k % 4;
    const Eigen::MatrixXd a = random_hurwitz(n, rng);
    const Eigen::MatrixXd q = random_spd(n, rng);
    const Eigen::MatrixXd p = solve_lyapunov(a, q);
    const double rel = (a.transpose() * p + p * a + q).norm() / q.norm();
    reports.push_back(make_report(tag("lyapunov_residual", k), rel, 0.0, 1e-9, 0.0));
  }
  return reports;
}

std::vector<OracleReport> nu_linear_campaign(std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed ^ 0x517cc1b727220a95ull);
  const Scenario scenario = build_scenario("double_integrator");
  const auto plant = std::dynamic_pointer_cast<const LinearPlant>(scenario.plant);
  const QuadraticForm& form = *scenario.form;
  const double nu_cap = 1e6;

  std::uniform_real_distribution<double> g_dist(-0.85, 0.85);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<OracleReport> reports;
  for (int k = 0; k < count; ++k) {
    Eigen::VectorXd g(1);
    g << g_dist(rng);
    const Eigen::VectorXd x_g = plant->steady_state(g);
    const Eigen::VectorXd x = x_g + random_gaussian(2, 0.08, rng);
    Eigen::VectorXd rho(1);
    rho << (coin(rng) < 0.5 ? -1.0 : 1.0);

    const ActiveSet active = gamma_active_set(scenario.constraints, form, x_g, 1e-9);
    const double nu_star =
        nu_linear(x, g, rho, *plant, scenario.constraints, form, active, nu_cap);

    const Eigen::VectorXd xt = x - x_g;
    const auto vdot_at = [&](double nu) {
      return -xt.dot(plant->q() * xt) + 2.0 * xt.dot(form.matrix() * (plant->ainv_b() * rho)) * nu;
    };
    const auto min_gdot_at = [&](double nu) {
      double worst = std::numeric_limits<double>::infinity();
      for (int i : active.indices) {
        const PolytopicConstraint& c = scenario.constraints[static_cast<std::size_t>(i)];
        const Eigen::VectorXd csum = c.c_x + c.c_g;
        const double beta = (csum.dot(x_g) + c.d) / c.c_x.dot(form.solve(c.c_x));
        worst = std::min(worst, -2.0 * beta * csum.dot(plant->ainv_b() * rho) * nu);
      }
      return worst;
    };

    // Finite differences of V and of the worst active threshold along the
    // flow with gdot = rho nu*.
    const auto v_value = [&](const Eigen::VectorXd& xs, const Eigen::VectorXd& gs) {
      return form.value(xs, plant->steady_state(gs));
    };
    const double h = 1e-6 / (1.0 + 1e-3 * nu_star);
    const double fd_vdot = flow_fd(*plant, x, g, rho, nu_star, v_value, h);
    reports.push_back(
        make_report(tag("nu_lin_vdot_fd", k), fd_vdot, vdot_at(nu_star), 1e-9, 1e-5));

    if (nu_star < nu_cap) {
      reports.push_back(make_report(tag("nu_lin_tangency", k), vdot_at(nu_star),
                                    min_gdot_at(nu_star), 1e-7, 1e-7));
      OracleReport largest;
      largest.name = tag("nu_lin_largest", k);
      largest.computed = vdot_at(1.01 * nu_star) - min_gdot_at(1.01 * nu_star);
      largest.reference = 0.0;
      largest.abs_err = 0.0;
      largest.rel_err = 0.0;
      largest.tol_abs = 0.0;
      largest.tol_rel = 0.0;
      largest.pass = nu_star == 0.0 ? largest.computed >= 0.0 : largest.computed > 0.0;
      reports.push_back(largest);
    }
  }
  return reports;
}

std::vector<OracleReport> nu_robot_campaign(std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed ^ 0x2545f4914f6cdd1dull);
  const Scenario scenario = build_scenario("two_link_arm");
  const auto plant = std::dynamic_pointer_cast<const RobotPlant>(scenario.plant);
  const QuadraticForm& form = *scenario.form;
  const double nu_cap = 1e6;

  std::uniform_real_distribution<double> q1(2.0 * M_PI / 9.0 + 0.1, 7.0 * M_PI / 9.0 - 0.1);
  std::uniform_real_distribution<double> q2(-M_PI + 0.1, -M_PI / 4.0 - 0.1);
  std::vector<OracleReport> reports;
  for (int k = 0; k < count; ++k) {
    Eigen::VectorXd g(2);
    g << q1(rng), q2(rng);
    Eigen::VectorXd x(4);
    x.head(2) = g + random_gaussian(2, 0.05, rng);
    x.tail(2) = random_gaussian(2, 0.4, rng);
    const Eigen::VectorXd rho = random_unit(2, rng);

    const Eigen::VectorXd x_g = plant->steady_state(g);
    const ActiveSet active = gamma_active_set(scenario.constraints, form, x_g, 1e-9);
    const double nu_star = nu_robot(x, g, rho, *plant, scenario.constraints, active, nu_cap);

    const Eigen::VectorXd qv = x.head(2);
    const Eigen::VectorXd qd = x.tail(2);
    const auto vdot_at = [&](double nu) {
      return -qd.dot(plant->kd().asDiagonal() * qd) -
             (qv - g).dot(plant->kp().asDiagonal() * rho) * nu;
    };
    const auto min_gdot_at = [&](double nu) {
      // Gammadot by direct differentiation through x_g = (g, 0).
      double worst = std::numeric_limits<double>::infinity();
      for (int i : active.indices) {
        const PolytopicConstraint& c = scenario.constraints[static_cast<std::size_t>(i)];
        const Eigen::VectorXd c_r = (c.c_x + c.c_g).head(2);
        const double beta = (c_r.dot(g) + c.d) / c.c_x.dot(form.solve(c.c_x));
        worst = std::min(worst, 2.0 * beta * c_r.dot(rho) * nu);
      }
      return worst;
    };

    // Full energy function, mass matrix included, differentiated numerically.
    const auto v_value = [&](const Eigen::VectorXd& xs, const Eigen::VectorXd& gs) {
      return plant->lyapunov_value(xs, gs, form);
    };
    const double h = 1e-7 / (1.0 + 1e-3 * nu_star);
    const double fd_vdot = flow_fd(*plant, x, g, rho, nu_star, v_value, h);
    reports.push_back(
        make_report(tag("nu_rob_vdot_fd", k), fd_vdot, vdot_at(nu_star), 1e-8, 1e-5));

    if (nu_star < nu_cap) {
      reports.push_back(make_report(tag("nu_rob_tangency", k), vdot_at(nu_star),
                                    min_gdot_at(nu_star), 1e-7, 1e-7));
      OracleReport largest;
      largest.name = tag("nu_rob_largest", k);
      largest.computed = vdot_at(1.01 * nu_star) - min_gdot_at(1.01 * nu_star);
      largest.reference = 0.0;
      largest.tol_abs = 0.0;
      largest.tol_rel = 0.0;
      largest.pass = nu_star == 0.0 ? largest.computed >= 0.0 : largest.computed > 0.0;
      reports.push_back(largest);
    }
  }
  return reports;
}

std::vector<OracleReport> robot_model_campaign(std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0xda3e39cb94b95bdbull);
  const TwoLinkParams params;
  Eigen::VectorXd kp(2), kd(2);
  kp << 65.0, 45.0;
  kd << 1.6, 1.3;
  const RobotPlant arm = make_two_link_arm(params, kp, kd);
  std::vector<OracleReport> reports;

  // Skew symmetry of Mdot - 2C, with Mdot by central differences.
  std::uniform_real_distribution<double> angle(-M_PI, M_PI);
  double worst_skew = 0.0;
  for (int k = 0; k < 25; ++k) {
    Eigen::VectorXd q(2), qd(2);
    q << angle(rng), angle(rng);
    qd = random_gaussian(2, 0.7, rng);
    const double h = 1e-5;
    const Eigen::MatrixXd mdot = (arm.mass(q + h * qd) - arm.mass(q - h * qd)) / (2.0 * h);
    const Eigen::MatrixXd s = mdot - 2.0 * arm.coriolis(q, qd);
    worst_skew = std::max(worst_skew, (s + s.transpose()).cwiseAbs().maxCoeff());
  }
  reports.push_back(make_report("skew_mdot_minus_2c", worst_skew, 0.0, 1e-9, 0.0));

  // Closed-loop energy balance dE/dt = -qdot' K_D qdot along a short rollout.
  {
    Eigen::VectorXd g(2), x0(4);
    g << M_PI / 2.0, -M_PI / 2.0;
    x0.head(2) = g + Eigen::Vector2d(0.3, -0.25);
    x0.tail(2) = Eigen::Vector2d(0.1, -0.1);
    const double dt = 1e-5;
    const auto segment = integrate_fixed_reference(arm, x0, g, dt, 40);
    const auto energy = [&](const Eigen::VectorXd& xs) {
      return arm.lyapunov_value(xs, g, arm.lyapunov_form());
    };
    const auto fd = finite_difference_vdot(energy, segment, dt);
    double worst_rel = 0.0;
    for (std::size_t k = 0; k < fd.size(); ++k) {
      const Eigen::VectorXd qd = segment[k + 1].tail(2);
      const double expected = -qd.dot(kd.asDiagonal() * qd);
      worst_rel = std::max(worst_rel, std::abs(fd[k] - expected) / std::max(1.0, std::abs(expected)));
    }
    reports.push_back(make_report("energy_balance", worst_rel, 0.0, 1e-6, 0.0));
  }

  // Mass lower bound: PSD of M(q) - M_lower on a fine grid, and refinement
  // stability of the grid minimum eigenvalue.
  {
    const Eigen::MatrixXd m_lower = arm.mass_bound();
    std::vector<Eigen::VectorXd> grid;
    grid.reserve(3601);
    for (int i = 0; i < 3601; ++i) {
      Eigen::VectorXd q = Eigen::VectorXd::Zero(2);
      q[1] = -M_PI + 2.0 * M_PI * i / 3600.0;
      grid.push_back(q);
    }
    const auto gap = [&](const Eigen::VectorXd& q) -> Eigen::MatrixXd {
      return arm.mass(q) - m_lower;
    };
    const PsdGridResult psd = psd_grid_check(gap, grid);
    OracleReport psd_report;
    psd_report.name = "mass_bound_psd_grid";
    psd_report.computed = psd.worst_eigenvalue;
    psd_report.reference = 0.0;
    psd_report.tol_abs = 1e-10;
    psd_report.pass = psd.pass;
    reports.push_back(psd_report);

    const double coarse = mass_lower_bound(arm, 361)(0, 0);
    const double fine = mass_lower_bound(arm, 3601)(0, 0);
    reports.push_back(make_report("mass_bound_refinement", coarse, fine, 0.0, 1e-3));
  }

  // The constant matrix displayed as a bound is not PSD-dominated by M(q).
  {
    const double distal = params.iz2 + params.m2 * params.r2 * params.r2;
    const double base = params.iz1 + params.iz2 + params.m1 * params.r1 * params.r1 +
                        params.m2 * (params.l1 * params.l1 + params.r2 * params.r2);
    Eigen::Matrix2d naive;
    naive << base, distal, distal, distal;
    const Eigen::VectorXd q0 = Eigen::VectorXd::Zero(2);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(arm.mass(q0) - naive);
    OracleReport counter;
    counter.name = "naive_mass_bound_counterexample";
    counter.computed = es.eigenvalues().minCoeff();
    counter.reference = -1e-6;
    counter.pass = counter.computed < -1e-6;
    reports.push_back(counter);
  }

  return reports;
}

std::vector<OracleReport> run_all_campaigns(std::uint64_t seed, int count) {
  std::vector<OracleReport> all;
  if (count <= 0) return all;
  const auto append = [&all](std::vector<OracleReport> part) {
    for (auto& r : part) all.push_back(std::move(r));
  };
  append(gamma_formula_campaign(seed, count));
  append(lyapunov_residual_campaign(seed, std::max(1, count / 2)));
  append(nu_linear_campaign(seed, count));
  append(nu_robot_campaign(seed, count));
  append(robot_model_campaign(seed));
  return all;
}

}  // namespace erg::oracles
