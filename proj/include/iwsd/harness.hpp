#ifndef IWSD_HARNESS_HPP_
#define IWSD_HARNESS_HPP_

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "iwsd/csv.hpp"
#include "iwsd/sampler.hpp"
#include "iwsd/scenarios.hpp"
#include "json.hpp"

namespace iwsd {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// CLI exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitIo = 2;
inline constexpr int kExitScenario = 3;

// Default initial slackness per elimination loss when r0 is not given
// explicitly: the working values used by the reference experiments.
double auto_r0(LossKind kind);

struct ExperimentConfig {
  nlohmann::json scenario_config;
  std::vector<MethodSpec> methods;
  int trials = 1;
  int horizon = 1;
  double delta = 0.1;
  std::map<std::string, double> r0;  // per-method overrides; missing = auto
  std::uint64_t base_seed = 1;
  int parallelism = 1;

  static ExperimentConfig from_json(const nlohmann::json& j);
  double r0_for(const MethodSpec& method) const;
};

struct TrialMethodResult {
  int trial;
  std::string method;
  std::vector<IterationRow> rows;   // as logged; may be shorter than horizon
  std::vector<double> excess;       // exact excess risk of best, per t
  std::vector<double> l2;           // population squared loss of best, per t
  std::vector<double> pct;          // pct SPO risk of best, per t (NaN = n/a)
  bool stopped = false;
  bool elim_success = false;        // final active set inside H*
};

struct AggregateRow {
  std::string method;
  int t;
  double mean_excess;
  double ci95;
  double mean_l2;
  double pct;  // mean pct SPO risk at t; NaN when unavailable
};

struct MethodSummary {
  std::string method;
  double final_pct = 0.0;  // NaN when unavailable
  double elim_success_freq = 0.0;
  double stopped_freq = 0.0;
};

struct ExperimentResult {
  std::vector<TrialMethodResult> trials;  // trial-major, then method order
  std::vector<AggregateRow> aggregate;
  std::vector<MethodSummary> summary;
};

// Runs trials x methods. Per-trial seeds derive from the base seed; methods
// within a trial share one label stream keyed by (design, draw index), so
// coinciding draws see identical noise. Trials run concurrently up to
// `parallelism`; aggregation folds results in trial order regardless of
// completion order.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const Scenario& scenario);

CsvTable trajectory_table(const ExperimentResult& result,
                          const Scenario& scenario);
CsvTable aggregate_table(const ExperimentResult& result);
CsvTable summary_table(const ExperimentResult& result);

struct CompareSpec {
  nlohmann::json scenario_config;
  std::vector<MethodSpec> methods;
  int trials = 10;
  int horizon = 100;
  double delta = 0.1;
  std::map<std::string, double> r0;
  std::uint64_t base_seed = 1;
  int parallelism = 1;
  std::vector<double> cost_ratios;  // empty = single pass on the scenario
};

struct CompareResult {
  CsvTable table;   // per (sweep point, method) final metrics
  CsvTable ratios;  // pairwise final loss ratios
};

CompareResult run_compare(const CompareSpec& spec);

// CLI entry points; exceptions are mapped to exit codes.
int cli_run(const std::string& config_path, const std::string& out_dir);
int cli_compare(const std::string& scenario_path, const std::string& methods,
                int trials, int horizon, const std::string& ratios,
                const std::string& out_dir, std::uint64_t seed, double delta,
                int parallelism);
int cli_gap(const std::string& scenario_path);
int cli_check(std::uint64_t seed);

}  // namespace iwsd

#endif  // IWSD_HARNESS_HPP_
