#ifndef IWSD_SCENARIOS_HPP_
#define IWSD_SCENARIOS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "iwsd/scenario.hpp"
#include "json.hpp"

namespace iwsd {

// Cost-sensitive classification mapped to a linear program over the
// probability simplex: the decision picks a class, the label for true class
// j is row j of the cost matrix.
struct CostSensitiveSpec {
  std::vector<Vec> cost_matrix;    // k x k, nonnegative, zero diagonal
  Vec positive_rates;              // binary shortcut: per-design P(class 2)
  std::vector<Vec> class_probs;    // general form: per-design distribution
  Vec mu;                          // empty = uniform over designs
  nlohmann::json class_spec;       // see build_hypothesis_class below
  std::uint64_t seed = 1;
};

Scenario cost_sensitive_scenario(const CostSensitiveSpec& spec);

// C = [[0, 1], [ratio, 0]]: false positives cost 1, false negatives `ratio`.
std::vector<Vec> cost_ratio_matrix(double ratio);

struct JointCapacity {
  std::vector<int> models;
  int limit;
};

// Task-to-model assignment with per-model capacities; the decision space is
// the set of feasible binary assignment matrices, labels are negated noisy
// scores clipped to the scoring scale [1, 5].
struct AssignmentSpec {
  int tasks = 5;
  int models = 4;
  std::vector<int> capacities = {1, 2, 2, 2};
  int demand = 1;
  std::vector<Vec> score_means;  // tasks x models; empty = built-in defaults
  double noise_sigma = 0.5;
  Vec mu;                        // empty = 5 uniform designs
  std::vector<JointCapacity> joint_capacities;
  nlohmann::json class_spec;     // empty = bootstrap means, sizes 1,3,5,7,10
  std::uint64_t seed = 1;
};

Scenario assignment_scenario(const AssignmentSpec& spec);

// Built-in per-task mean scores for the default 5x4 assignment instance.
const std::vector<Vec>& default_score_means();

// Enumerates feasible binary assignment vertices; throws past the guard.
inline constexpr int kMaxAssignmentVertices = 100000;
std::vector<Vec> enumerate_assignment_vertices(
    int tasks, int models, const std::vector<int>& capacities, int demand,
    const std::vector<JointCapacity>& joint_capacities);

// Single-design instance on the 2D simplex where two equal-norm hypotheses
// straddle the conditional mean at angles +-half_angle: their population
// squared losses coincide while their downstream decisions differ.
// mean_rotation is the angle from the cone boundary to the mean (defaults to
// half_angle / 2, which bisects exactly).
Scenario counterexample_scenario(double half_angle, double mean_norm,
                                 double noise_sigma,
                                 std::optional<double> mean_rotation = {});

// Two-design instance where both hypotheses share a direction at x2 (so the
// directional score of x2 is zero) but have cross-equal squared distances to
// the conditional means, making their population squared losses equal while
// only h1 minimizes the decision risk.
Scenario normalization_example_scenario(double noise_sigma);

// Empirical pool read from a CSV with header design_id,c_1,...,c_d. The
// label oracle resamples uniformly with replacement within each design.
struct CsvScenarioSpec {
  std::string path;
  nlohmann::json poly_spec;   // {"kind":"simplex","dim":k} or explicit schema
  nlohmann::json class_spec;
  nlohmann::json mu_override;  // optional: array or {design_id: prob} map
  std::uint64_t seed = 1;
};

Scenario csv_empirical_scenario(const CsvScenarioSpec& spec);

// Dispatch on {"kind": ...}; see README for the per-kind fields.
Scenario scenario_from_json(const nlohmann::json& config);

// Builds a hypothesis class from a JSON spec:
//   {"kind":"explicit","members":[...]}          inline class schema
//   {"kind":"file","path":...}                   class schema on disk
//   {"kind":"empirical_mean","sizes":[...]}      bootstrap means by size
//   {"kind":"mirrored", ...}                     cost-sensitive pairs (k=2)
HypothesisClass build_hypothesis_class(const nlohmann::json& spec,
                                       const Scenario& base,
                                       std::uint64_t seed);

struct ConditionReport {
  bool condition1 = false;  // some member is decision-equivalent to the mean
  bool condition2 = false;  // a design separates suboptimal from optimal
  bool condition3 = false;  // mean norms and vertex gap bounded away from 0
  double mu_lb = 0.0;
  double c_lb = 0.0;
  double gamma_lb = 0.0;
  double delta_pert = 0.0;
  double eta = 0.0;
  int witness_design = -1;
  std::vector<int> optimal;

  bool all_pass() const { return condition1 && condition2 && condition3; }
};

ConditionReport verify_conditions(const Scenario& scenario);

// Average percentage increase in SPO loss over the test set relative to the
// reference hypothesis. The reference loss sum must be positive.
double percentage_spo_risk(const Hypothesis& h, const Hypothesis& reference,
                           const Scenario& scenario,
                           const std::vector<std::pair<int, Vec>>& testset);

// Same metric from exact risks; requires finite support.
double percentage_spo_risk_exact(const Hypothesis& h,
                                 const Hypothesis& reference,
                                 const Scenario& scenario);

}  // namespace iwsd

#endif  // IWSD_SCENARIOS_HPP_
