#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "erg/scenarios.hpp"

namespace erg {

// Process exit codes shared by the command layer and the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitOracleFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInitialization = 3;
inline constexpr int kExitDivergence = 4;

struct RunConfig {
  std::string scenario;
  std::optional<std::filesystem::path> override_path;
  GovernorKind governor = GovernorKind::erg;
  std::filesystem::path out_dir = ".";
  std::optional<double> dt;
  std::optional<double> duration;
  std::uint64_t seed = 0;
};

/// Simulates and writes <scenario>_<governor>.csv and .metrics into out_dir.
int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Runs each governor on the identical scenario and prints a comparison
/// table (governor, settling_time, min_margin, per_step_cost).
int cmd_compare(const RunConfig& base, const std::vector<GovernorKind>& governors,
                std::ostream& out, std::ostream& err);

/// Runs the oracle campaigns; nonzero exit on any failing report.
int cmd_validate(std::uint64_t seed, int count, std::ostream& out, std::ostream& err);

int cmd_list_scenarios(std::ostream& out);

}  // namespace erg
