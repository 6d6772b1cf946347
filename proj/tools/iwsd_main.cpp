#include <cstdint>
#include <string>

#include "CLI11.hpp"
#include "iwsd/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "Sequential experimental design for predict-then-optimize: "
      "importance-weighted sampling driven by directional uncertainty, with "
      "decision-blind benchmarks, scenario generators, and a replication "
      "harness."};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  CLI::App* run = app.add_subcommand("run", "Run an experiment config");
  run->add_option("--config", config_path, "Experiment config JSON")->required();
  run->add_option("--out", out_dir, "Output directory for CSV files");

  std::string scenario_path;
  std::string methods = "all";
  std::string ratios;
  std::string compare_out = "out";
  int trials = 10;
  int horizon = 100;
  double delta = 0.1;
  std::uint64_t seed = 1;
  int parallelism = 1;
  CLI::App* compare =
      app.add_subcommand("compare", "Compare methods on one scenario");
  compare->add_option("--scenario", scenario_path, "Scenario config JSON")
      ->required();
  compare->add_option("--methods", methods,
                      "'all' or comma-separated method names");
  compare->add_option("--trials", trials, "Replications per method");
  compare->add_option("--horizon", horizon, "Iterations per run");
  compare->add_option("--ratios", ratios,
                      "Comma-separated cost-ratio sweep (cost_sensitive only)");
  compare->add_option("--out", compare_out, "Output directory");
  compare->add_option("--seed", seed, "Base seed");
  compare->add_option("--delta", delta, "Confidence parameter");
  compare->add_option("--parallelism", parallelism, "Concurrent trials");

  std::uint64_t check_seed = 20240817;
  CLI::App* check = app.add_subcommand("check", "Run the invariant suite");
  check->add_option("--seed", check_seed, "Seed for the random instances");

  std::string gap_scenario;
  CLI::App* gap =
      app.add_subcommand("gap", "Report margin and optimality-gap diagnostics");
  gap->add_option("--scenario", gap_scenario, "Scenario config JSON")->required();

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return iwsd::cli_run(config_path, out_dir);
  if (compare->parsed()) {
    return iwsd::cli_compare(scenario_path, methods, trials, horizon, ratios,
                             compare_out, seed, delta, parallelism);
  }
  if (check->parsed()) return iwsd::cli_check(check_seed);
  if (gap->parsed()) return iwsd::cli_gap(gap_scenario);
  return 1;
}
