#include "erg/scenarios.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

#include "erg/errors.hpp"

namespace erg {

namespace {

void append_number(std::string& out, double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  out.append(buf, res.ptr);
  out.push_back(';');
}

ErgParameters erg_params_from(const OverrideConfig& ov, const ErgParameters& defaults) {
  ErgParameters p = defaults;
  p.kappa = ov.scalar_or("erg", "kappa", p.kappa);
  p.eps1 = ov.scalar_or("erg", "eps1", p.eps1);
  p.eps2 = ov.scalar_or("erg", "eps2", p.eps2);
  p.nu_max = ov.scalar_or("erg", "nu_max", p.nu_max);
  p.tie_tol = ov.scalar_or("erg", "tie_tol", p.tie_tol);
  p.zero_dist_tol = ov.scalar_or("erg", "zero_dist_tol", p.zero_dist_tol);
  p.validate();
  return p;
}

ObrgConfig obrg_from(const OverrideConfig& ov, const ObrgConfig& defaults) {
  ObrgConfig c = defaults;
  c.ts = ov.scalar_or("obrg", "ts", c.ts);
  c.horizon = ov.scalar_or("obrg", "horizon", c.horizon);
  c.kappa_grid = static_cast<int>(ov.scalar_or("obrg", "kappa_grid", c.kappa_grid));
  c.validate();
  return c;
}

void apply_common(Scenario& s, const OverrideConfig& ov) {
  s.dt = ov.scalar_or("simulation", "dt", s.dt);
  s.duration = ov.scalar_or("simulation", "duration", s.duration);
  if (auto x0 = ov.vector("initial", "x0")) s.x0 = *x0;
  if (auto g0 = ov.vector("initial", "g0")) s.g0 = *g0;
  const auto steps = ov.repeated("reference", "at");
  if (!steps.empty()) {
    s.reference.clear();
    for (const Eigen::VectorXd& entry : steps) {
      if (entry.size() != s.g0.size() + 1) {
        throw ScenarioError("reference entries must be 'at = TIME v0 .. v{m-1}'");
      }
      ReferenceStep step;
      step.time = entry[0];
      step.value = entry.tail(entry.size() - 1);
      s.reference.push_back(std::move(step));
    }
  }
}

Scenario build_double_integrator(const OverrideConfig& ov) {
  const double kp = ov.scalar_or("plant", "kp", 100.0);
  const double kd = ov.scalar_or("plant", "kd", 8.0);
  const double q_scale = ov.scalar_or("plant", "q_scale", 1.0);
  const double x_max = ov.scalar_or("constraints", "x_max", 1.0);
  const double u_max = ov.scalar_or("constraints", "u_max", 30.0);

  Eigen::Matrix2d a;
  a << 0.0, 1.0, -kp, -kd;
  Eigen::MatrixXd b(2, 1);
  b << 0.0, kp;
  auto plant = std::make_shared<LinearPlant>(a, b, q_scale * Eigen::Matrix2d::Identity());

  Scenario s;
  s.name = "double_integrator";
  s.plant = plant;
  s.form = std::make_shared<QuadraticForm>(plant->p());

  const Eigen::Vector2d zero2 = Eigen::Vector2d::Zero();
  s.constraints.emplace_back(Eigen::Vector2d(1.0, 0.0), zero2, x_max);
  s.constraints.emplace_back(Eigen::Vector2d(-1.0, 0.0), zero2, x_max);
  s.constraints.emplace_back(Eigen::Vector2d(kp, kd), Eigen::Vector2d(-kp, 0.0), u_max);
  s.constraints.emplace_back(Eigen::Vector2d(-kp, -kd), Eigen::Vector2d(kp, 0.0), u_max);

  ErgParameters defaults;
  defaults.kappa = 100.0;
  defaults.eps1 = 1e-3;
  defaults.eps2 = 1e-3;
  defaults.nu_max = 1.0;
  defaults.zero_dist_tol = 5e-3;
  s.erg = erg_params_from(ov, defaults);
  s.obrg = obrg_from(ov, ObrgConfig{});

  s.x0 = Eigen::Vector2d::Zero();
  s.g0 = Eigen::VectorXd::Zero(1);
  s.reference = {{0.0, Eigen::VectorXd::Constant(1, 0.9)}};
  s.dt = 1e-3;
  s.duration = 4.0;
  apply_common(s, ov);
  return s;
}

Scenario build_two_link_arm(const OverrideConfig& ov) {
  TwoLinkParams params;
  params.gravity = ov.scalar_or("plant", "gravity", 9.81);
  Eigen::VectorXd kp(2), kd(2);
  kp << ov.scalar_or("plant", "kp1", 65.0), ov.scalar_or("plant", "kp2", 45.0);
  kd << ov.scalar_or("plant", "kd1", 1.6), ov.scalar_or("plant", "kd2", 1.3);
  const int mass_grid = static_cast<int>(ov.scalar_or("plant", "mass_grid", 361.0));

  const double q1_min = ov.scalar_or("constraints", "q1_min", 2.0 * M_PI / 9.0);
  const double q1_max = ov.scalar_or("constraints", "q1_max", 7.0 * M_PI / 9.0);
  const double q2_min = ov.scalar_or("constraints", "q2_min", -M_PI);
  const double q2_max = ov.scalar_or("constraints", "q2_max", -M_PI / 4.0);
  const double u1_max = ov.scalar_or("constraints", "u1_max", 35.0);
  const double u2_max = ov.scalar_or("constraints", "u2_max", 25.0);

  auto plant = std::make_shared<RobotPlant>(make_two_link_arm(params, kp, kd, mass_grid));

  // Gravity upper bounds over the admissible box: corner expressions, checked
  // against a grid and replaced by the grid maximum when they undershoot.
  const double corner = std::cos(q1_min + q2_max);
  double g1_bound =
      params.gravity * ((params.m1 * params.r1 + params.m2 * params.l1) * std::cos(q1_min) +
                        params.m2 * params.r2 * corner);
  double g2_bound = params.gravity * params.m2 * params.r2 * corner;
  {
    constexpr int kGrid = 721;
    double g1_grid = -std::numeric_limits<double>::infinity();
    double g2_grid = g1_grid;
    for (int i = 0; i < kGrid; ++i) {
      const double q1 = q1_min + (q1_max - q1_min) * i / (kGrid - 1);
      for (int j = 0; j < kGrid; ++j) {
        const double q2 = q2_min + (q2_max - q2_min) * j / (kGrid - 1);
        const double g1 =
            params.gravity * ((params.m1 * params.r1 + params.m2 * params.l1) * std::cos(q1) +
                              params.m2 * params.r2 * std::cos(q1 + q2));
        const double g2 = params.gravity * params.m2 * params.r2 * std::cos(q1 + q2);
        g1_grid = std::max(g1_grid, g1);
        g2_grid = std::max(g2_grid, g2);
      }
    }
    g1_bound = std::max(g1_bound, g1_grid * (1.0 + 1e-6));
    g2_bound = std::max(g2_bound, g2_grid * (1.0 + 1e-6));
  }
  if (u1_max <= g1_bound || u2_max <= g2_bound) {
    throw ScenarioError("torque limits do not dominate the gravity bounds");
  }

  Scenario s;
  s.name = "two_link_arm";
  s.plant = plant;
  s.form = std::make_shared<QuadraticForm>(plant->lyapunov_form().matrix());

  const Eigen::VectorXd zero4 = Eigen::VectorXd::Zero(4);
  auto unit = [](int i, double sign) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(4);
    v[i] = sign;
    return v;
  };
  s.constraints.emplace_back(unit(0, 1.0), zero4, -q1_min);
  s.constraints.emplace_back(unit(0, -1.0), zero4, q1_max);
  s.constraints.emplace_back(unit(1, 1.0), zero4, -q2_min);
  s.constraints.emplace_back(unit(1, -1.0), zero4, q2_max);

  auto torque_pair = [&](int joint, double kpj, double kdj, double bound) {
    Eigen::VectorXd cx = Eigen::VectorXd::Zero(4);
    cx[joint] = kpj;
    cx[joint + 2] = kdj;
    Eigen::VectorXd cg = Eigen::VectorXd::Zero(4);
    cg[joint] = -kpj;
    s.constraints.emplace_back(cx, cg, bound);
    s.constraints.emplace_back(-cx, -cg, bound);
  };
  torque_pair(0, kp[0], kd[0], u1_max - g1_bound);
  torque_pair(1, kp[1], kd[1], u2_max - g2_bound);

  ErgParameters defaults;
  defaults.kappa = 2.0;
  defaults.eps1 = 1e-3;
  defaults.eps2 = 1e-3;
  defaults.nu_max = 2.0;
  defaults.zero_dist_tol = 1e-6;
  s.erg = erg_params_from(ov, defaults);
  s.obrg = obrg_from(ov, ObrgConfig{});

  Eigen::VectorXd g0(2);
  g0 << M_PI / 2.0, -M_PI / 2.0;
  s.g0 = g0;
  s.x0 = plant->steady_state(g0);
  Eigen::VectorXd target(2);
  target << 2.2, -1.0;
  s.reference = {{0.0, target}};
  s.dt = 1e-3;
  s.duration = 10.0;
  apply_common(s, ov);
  return s;
}

Scenario build_inverted_pendulum(const OverrideConfig& ov) {
  Eigen::MatrixXd a(4, 4);
  a << 0, 1, 0, 0,
       0, -1.92, 0, 0,
       0, 0, 0, 1,
       0, -0.96, 38.9, -1.21;
  Eigen::MatrixXd b(4, 1);
  b << 0, 22.08, 0, 11.04;
  Eigen::RowVectorXd k(4);
  k << -1.27, -0.93, 24.88, 3.50;

  // Force F = k (x - x_g) enters as u = -F, so the loop closes as A - B k
  // with reference injection through the cart-position channel.
  const Eigen::MatrixXd a_cl = a - b * k;
  const Eigen::MatrixXd b_cl = b * k(0);
  auto plant = std::make_shared<LinearClosedLoopPlant>(a_cl, b_cl);

  Eigen::MatrixXd p(4, 4);
  p << 6.08, 3.30, -66.1, -6.65,
       3.30, 2.52, -53.3, -5.44,
       -66.1, -53.3, 1369, 124,
       -6.65, -5.44, 124, 14.9;
  auto form = std::make_shared<QuadraticForm>(p);

  const double gamma_level = ov.scalar_or("constraints", "gamma_level", 210.0);
  if (!(gamma_level > 0.0)) throw ScenarioError("gamma_level must be > 0");
  Eigen::VectorXd e3 = Eigen::VectorXd::Zero(4);
  e3[2] = 1.0;
  const double theta_max = std::sqrt(gamma_level * e3.dot(form->solve(e3)));

  Scenario s;
  s.name = "inverted_pendulum";
  s.plant = plant;
  s.form = form;
  const Eigen::VectorXd zero4 = Eigen::VectorXd::Zero(4);
  s.constraints.emplace_back(-e3, zero4, theta_max);
  s.constraints.emplace_back(e3, zero4, theta_max);

  ErgParameters defaults;
  defaults.kappa = 0.05;
  defaults.eps1 = 0.05;
  defaults.eps2 = 1e-3;
  defaults.nu_max = 0.0;
  defaults.zero_dist_tol = 1e-6;
  s.erg = erg_params_from(ov, defaults);
  s.obrg = obrg_from(ov, ObrgConfig{});

  s.x0 = Eigen::VectorXd::Zero(4);
  s.g0 = Eigen::VectorXd::Zero(1);
  s.reference = {{0.0, Eigen::VectorXd::Constant(1, 0.5)}};
  s.dt = 1e-3;
  s.duration = 4.0;
  apply_common(s, ov);
  return s;
}

}  // namespace

std::string governor_name(GovernorKind kind) {
  switch (kind) {
    case GovernorKind::none: return "none";
    case GovernorKind::erg: return "erg";
    case GovernorKind::erg_no_ff: return "erg_no_ff";
    case GovernorKind::obrg: return "obrg";
  }
  throw std::logic_error("unreachable governor kind");
}

GovernorKind parse_governor(const std::string& name) {
  if (name == "none") return GovernorKind::none;
  if (name == "erg") return GovernorKind::erg;
  if (name == "erg_no_ff") return GovernorKind::erg_no_ff;
  if (name == "obrg") return GovernorKind::obrg;
  throw ScenarioError("unknown governor '" + name + "'");
}

void ObrgConfig::validate() const {
  if (!(ts > 0.0)) throw std::invalid_argument("obrg ts must be > 0");
  if (!(horizon >= ts)) throw std::invalid_argument("obrg horizon must be >= ts");
  if (kappa_grid < 2) throw std::invalid_argument("obrg kappa_grid must be >= 2");
}

Eigen::VectorXd Scenario::reference_at(double t) const {
  const Eigen::VectorXd* value = nullptr;
  for (const ReferenceStep& step : reference) {
    if (step.time <= t + 1e-12) value = &step.value;
  }
  if (!value) throw std::logic_error("reference program does not cover t=0");
  return *value;
}

void Scenario::validate() const {
  if (!plant || !form) throw ScenarioError("scenario missing plant or quadratic form");
  if (!(dt > 0.0)) throw ScenarioError("dt must be > 0");
  if (!(duration >= dt)) throw ScenarioError("duration must be >= dt");
  if (reference.empty() || reference.front().time != 0.0) {
    throw ScenarioError("reference program must start at time 0");
  }
  for (std::size_t i = 0; i + 1 < reference.size(); ++i) {
    if (!(reference[i].time < reference[i + 1].time)) {
      throw ScenarioError("reference program times must be strictly increasing");
    }
  }
  const int n = plant->state_dim();
  const int m = plant->reference_dim();
  if (x0.size() != n || g0.size() != m) throw ScenarioError("initial condition dimension mismatch");
  if (form->dim() != n) throw ScenarioError("quadratic form dimension mismatch");
  for (const ReferenceStep& step : reference) {
    if (step.value.size() != m) throw ScenarioError("reference value dimension mismatch");
  }
  if (constraints.empty()) throw ScenarioError("scenario needs at least one constraint");
  for (const PolytopicConstraint& c : constraints) c.validate(n);
  erg.validate();
  obrg.validate();

  if (governor == GovernorKind::erg || governor == GovernorKind::erg_no_ff) {
    const ActiveSet active = gamma_active_set(constraints, *form, plant->steady_state(g0), erg.tie_tol);
    const double v0 = plant->lyapunov_value(x0, g0, *form);
    if (!(v0 <= active.gamma_min)) {
      throw InitializationError("initial state violates V(x0, x_g(g0)) <= Gamma_I(g0)");
    }
  }
}

std::uint64_t Scenario::hash() const {
  std::string blob = name + ';' + governor_name(governor) + ';';
  append_number(blob, dt);
  append_number(blob, duration);
  append_number(blob, erg.kappa);
  append_number(blob, erg.eps1);
  append_number(blob, erg.eps2);
  append_number(blob, erg.nu_max);
  append_number(blob, erg.tie_tol);
  append_number(blob, erg.zero_dist_tol);
  append_number(blob, obrg.ts);
  append_number(blob, obrg.horizon);
  append_number(blob, obrg.kappa_grid);
  for (Eigen::Index i = 0; i < x0.size(); ++i) append_number(blob, x0[i]);
  for (Eigen::Index i = 0; i < g0.size(); ++i) append_number(blob, g0[i]);
  for (const ReferenceStep& step : reference) {
    append_number(blob, step.time);
    for (Eigen::Index i = 0; i < step.value.size(); ++i) append_number(blob, step.value[i]);
  }
  for (const PolytopicConstraint& c : constraints) {
    for (Eigen::Index i = 0; i < c.c_x.size(); ++i) append_number(blob, c.c_x[i]);
    for (Eigen::Index i = 0; i < c.c_g.size(); ++i) append_number(blob, c.c_g[i]);
    append_number(blob, c.d);
  }
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : blob) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::vector<std::string> builtin_scenario_names() {
  return {"double_integrator", "two_link_arm", "inverted_pendulum"};
}

Scenario build_scenario(const std::string& name, const OverrideConfig& overrides) {
  Scenario s;
  if (name == "double_integrator") {
    s = build_double_integrator(overrides);
  } else if (name == "two_link_arm") {
    s = build_two_link_arm(overrides);
  } else if (name == "inverted_pendulum") {
    s = build_inverted_pendulum(overrides);
  } else {
    throw ScenarioError("unknown scenario '" + name + "'");
  }
  overrides.check_fully_consumed();
  return s;
}

}  // namespace erg
