// Command-line front end: run scenarios, compare governors, validate the
// implementation against brute-force oracles, emit CSV trajectories and
// metric summaries.

#include <CLI11.hpp>
#include <iostream>

#include "erg/commands.hpp"
#include "erg/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Explicit reference governor simulator"};
  app.require_subcommand(1);

  std::string scenario;
  std::string governor = "erg";
  std::vector<std::string> governors;
  std::string override_path;
  std::string out_dir = ".";
  double dt = -1.0;
  double duration = -1.0;
  std::uint64_t seed = 20240913;
  int count = 100;

  auto* run = app.add_subcommand("run", "Simulate one scenario and write CSV + metrics");
  run->add_option("--scenario", scenario, "Built-in scenario name")->required();
  run->add_option("--governor", governor, "none|erg|erg_no_ff|obrg");
  run->add_option("--override", override_path, "Override file path");
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--dt", dt, "Integration step [s]");
  run->add_option("--duration", duration, "Run length [s]");
  run->add_option("--seed", seed, "Run seed (recorded in config identity)");

  auto* compare = app.add_subcommand("compare", "Run several governors on one scenario");
  compare->add_option("--scenario", scenario, "Built-in scenario name")->required();
  compare->add_option("--governor", governors, "Governor (repeat for each)")->expected(-1);
  compare->add_option("--override", override_path, "Override file path");
  compare->add_option("--out", out_dir, "Output directory");
  compare->add_option("--dt", dt, "Integration step [s]");
  compare->add_option("--duration", duration, "Run length [s]");
  compare->add_option("--seed", seed, "Run seed");

  auto* validate = app.add_subcommand("validate", "Run the brute-force oracle campaigns");
  validate->add_option("--seed", seed, "Campaign seed");
  validate->add_option("--count", count, "Instances per campaign (0 skips everything)");

  app.add_subcommand("list-scenarios", "Print the built-in scenario names");

  CLI11_PARSE(app, argc, argv);

  erg::RunConfig config;
  config.scenario = scenario;
  if (!override_path.empty()) config.override_path = override_path;
  config.out_dir = out_dir;
  if (dt > 0.0) config.dt = dt;
  if (duration > 0.0) config.duration = duration;
  config.seed = seed;

  try {
    if (run->parsed()) {
      config.governor = erg::parse_governor(governor);
      return erg::cmd_run(config, std::cout, std::cerr);
    }
    if (compare->parsed()) {
      std::vector<erg::GovernorKind> kinds;
      kinds.reserve(governors.size());
      for (const std::string& name : governors) kinds.push_back(erg::parse_governor(name));
      return erg::cmd_compare(config, kinds, std::cout, std::cerr);
    }
    if (validate->parsed()) {
      return erg::cmd_validate(seed, count, std::cout, std::cerr);
    }
    return erg::cmd_list_scenarios(std::cout);
  } catch (const erg::ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return erg::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return erg::kExitUsage;
  }
}
