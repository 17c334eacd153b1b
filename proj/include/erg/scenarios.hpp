#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "erg/config.hpp"
#include "erg/governor.hpp"
#include "erg/plants.hpp"

namespace erg {

enum class GovernorKind { none, erg, erg_no_ff, obrg };

std::string governor_name(GovernorKind kind);
GovernorKind parse_governor(const std::string& name);

/// Prediction-based baseline configuration.
struct ObrgConfig {
  double ts = 0.01;      // sampling period [s]
  double horizon = 0.5;  // prediction length [s]
  int kappa_grid = 101;  // candidate step fractions in [0, 1]

  void validate() const;
};

struct ReferenceStep {
  double time = 0.0;
  Eigen::VectorXd value;
};

/// A fully wired simulation case: plant, threshold geometry, governor
/// tunables, initial conditions and the reference program.
struct Scenario {
  std::string name;
  std::shared_ptr<const PlantModel> plant;
  std::shared_ptr<const QuadraticForm> form;
  std::vector<PolytopicConstraint> constraints;
  ErgParameters erg;
  ObrgConfig obrg;
  Eigen::VectorXd x0;
  Eigen::VectorXd g0;
  std::vector<ReferenceStep> reference;
  double dt = 1e-3;
  double duration = 1.0;
  GovernorKind governor = GovernorKind::erg;

  /// Piecewise-constant reference at time t.
  Eigen::VectorXd reference_at(double t) const;

  /// Structural invariants plus, for the ERG governors, the initialization
  /// check V(x0, x_g(g0)) <= Gamma_I(g0). Throws on violation.
  void validate() const;

  /// FNV-1a over the scenario definition; trajectory metadata only.
  std::uint64_t hash() const;
};

std::vector<std::string> builtin_scenario_names();

/// Assembles a built-in scenario, applying overrides from a parsed config.
/// Unknown names or unconsumed override keys raise ScenarioError.
Scenario build_scenario(const std::string& name, const OverrideConfig& overrides = {});

}  // namespace erg
