#include "erg/commands.hpp"

#include <iomanip>

#include "erg/errors.hpp"
#include "erg/oracles.hpp"
#include "erg/simulation.hpp"
#include "erg/trajectory_io.hpp"

namespace erg {

namespace {

Scenario load_scenario(const RunConfig& config, GovernorKind governor) {
  OverrideConfig overrides;
  if (config.override_path) overrides = OverrideConfig::parse_file(*config.override_path);
  Scenario scenario = build_scenario(config.scenario, overrides);
  if (config.dt) scenario.dt = *config.dt;
  if (config.duration) scenario.duration = *config.duration;
  scenario.governor = governor;
  return scenario;
}

struct RunResult {
  Trajectory trajectory;
  Metrics metrics;
};

RunResult run_one(const RunConfig& config, GovernorKind governor) {
  const Scenario scenario = load_scenario(config, governor);
  RunResult result;
  result.trajectory = simulate(scenario);
  result.metrics = compute_metrics(result.trajectory, scenario);
  return result;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const InitializationError*>(&e)) return kExitInitialization;
  if (dynamic_cast<const DivergenceError*>(&e)) return kExitDivergence;
  return kExitUsage;
}

}  // namespace

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    const RunResult result = run_one(config, config.governor);
    const std::string stem = config.scenario + "_" + governor_name(config.governor);
    const auto csv_path = config.out_dir / (stem + ".csv");
    const auto metrics_path = config.out_dir / (stem + ".metrics");
    write_file_atomic(csv_path, trajectory_csv(result.trajectory));
    write_file_atomic(metrics_path, metrics_text(result.metrics));
    out << "wrote " << csv_path.string() << "\n";
    out << "wrote " << metrics_path.string() << "\n";
    if (result.trajectory.obrg_hold_infeasible) {
      err << "warning: obrg hold command predicted infeasible at least once\n";
    }
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

int cmd_compare(const RunConfig& base, const std::vector<GovernorKind>& governors,
                std::ostream& out, std::ostream& err) {
  if (governors.size() < 2) {
    err << "error: compare needs at least two governors\n";
    return kExitUsage;
  }
  try {
    out << std::left << std::setw(12) << "governor" << std::right << std::setw(16)
        << "settling_time" << std::setw(16) << "min_margin" << std::setw(16) << "per_step_cost"
        << "\n";
    for (GovernorKind governor : governors) {
      const RunResult result = run_one(base, governor);
      out << std::left << std::setw(12) << governor_name(governor) << std::right
          << std::setw(16) << format_double(result.metrics.settling_time) << std::setw(16)
          << format_double(result.metrics.min_margin) << std::setw(16)
          << format_double(result.metrics.per_step_cost) << "\n";
    }
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

int cmd_validate(std::uint64_t seed, int count, std::ostream& out, std::ostream& err) {
  if (count <= 0) {
    err << "warning: zero-size campaigns requested; nothing checked\n";
    return kExitOk;
  }
  const auto reports = oracles::run_all_campaigns(seed, count);
  out << std::left << std::setw(34) << "check" << std::right << std::setw(16) << "computed"
      << std::setw(16) << "reference" << std::setw(13) << "abs_err" << std::setw(13) << "rel_err"
      << std::setw(7) << "pass" << "\n";
  std::size_t failures = 0;
  for (const auto& r : reports) {
    if (!r.pass) ++failures;
    out << std::left << std::setw(34) << r.name << std::right << std::setw(16)
        << format_double(r.computed) << std::setw(16) << format_double(r.reference)
        << std::setw(13) << std::scientific << std::setprecision(2) << r.abs_err << std::setw(13)
        << r.rel_err << std::defaultfloat << std::setw(7) << (r.pass ? "ok" : "FAIL") << "\n";
  }
  out << reports.size() - failures << "/" << reports.size() << " oracle checks passed (seed "
      << seed << ")\n";
  if (failures > 0) {
    err << "error: " << failures << " oracle check(s) failed\n";
    return kExitOracleFailure;
  }
  return kExitOk;
}

int cmd_list_scenarios(std::ostream& out) {
  for (const std::string& name : builtin_scenario_names()) out << name << "\n";
  return kExitOk;
}

}  // namespace erg
