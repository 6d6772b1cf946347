#ifndef IWSD_SAMPLER_HPP_
#define IWSD_SAMPLER_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "iwsd/losses.hpp"
#include "iwsd/sample_record.hpp"
#include "iwsd/scenario.hpp"

namespace iwsd {

enum class Uncertainty { kDirectional, kEuclidean };

// One cell of the method grid: how designs are scored and which loss drives
// elimination and selection. (Directional, SPO) is the importance-weighted
// directional-uncertainty design; (Euclidean, SquaredL2) is the fully
// decision-blind benchmark; the other two cells are the hybrids.
struct MethodSpec {
  Uncertainty uncertainty;
  LossKind elimination_loss;

  std::string name() const;
  static MethodSpec parse(const std::string& name);
  static std::vector<MethodSpec> all();  // fixed presentation order
};

struct EngineConfig {
  MethodSpec method;
  int horizon = 1;      // T
  double r0 = 1.0;      // initial slackness
  double delta = 0.1;   // confidence parameter (kept for reporting)
  std::uint64_t seed = 0;
  // When set, labels are drawn from streams keyed by this seed instead of
  // `seed`, so different methods can share label noise per (design, draw).
  std::optional<std::uint64_t> label_seed;
  std::optional<double> weight_clip;  // cap on mu/pi; off by default
};

enum class EngineStatus { kRunning, kStoppedZeroUncertainty, kFinished };

struct EngineState {
  int t = 0;
  std::vector<int> active;  // surviving member indices, ascending
  std::vector<SampleRecord> history;
  double slackness = 0.0;  // r_{t+1}, the slack the next elimination will use
  int best = 0;
  EngineStatus status = EngineStatus::kRunning;
};

// Per-design score: max pairwise prediction disagreement over the active
// members, directional (normalized) or raw Euclidean. All zeros for a
// singleton active set.
Vec uncertainty_scores(const std::vector<int>& active,
                       const HypothesisClass& cls, Uncertainty kind);

// scores / sum(scores), or nullopt when the total mass is (numerically)
// zero, which signals the stopping rule.
std::optional<Vec> sampling_distribution(const Vec& scores);

// r_{t+1} = r_t * sqrt(t/(t+1) * log(2(t+1)) / log(2t)), natural logs.
// Telescopes to r_t = r_1 * sqrt(log(2t) / (t log 2)).
double update_slackness(double r_t, int t);

// max{2 omega, 2 gamma L sqrt(log(2|H|/delta))}.
double default_r0(double omega, double gamma, double lipschitz, int class_size,
                  double delta);

// ceil of 3 (4 gamma L)^2 / eps^2 * log(2|H| / (eps^2 delta)).
long long stopping_time_bound(double epsilon, double delta, double gamma,
                              double lipschitz, int class_size);

// 4 gamma L sqrt(log(2 T |H| / delta) / T).
double risk_bound_at(int horizon, double gamma, double lipschitz,
                     int class_size, double delta);

struct IterationRow {
  int t;
  int design;  // -1 on the stopping row (no sample drawn)
  int n_active;
  double slackness;  // the r_t used by this iteration's elimination
  int best;
  bool stopped;
};

// Sequential engine for one run. Strictly sequential by nature; independent
// instances are safe to run concurrently.
class Engine {
 public:
  Engine(EngineConfig config, const Scenario& scenario);

  const EngineState& state() const { return state_; }
  const EngineConfig& config() const { return config_; }

  // One full iteration: score, sample, label, reweight, select, eliminate,
  // advance the slackness schedule. Returns the logged row. Throws unless
  // the engine is running.
  IterationRow step();

  // Runs up to the horizon, halting early on zero uncertainty.
  std::vector<IterationRow> run();

 private:
  double member_loss(int member, int design, const Vec& label,
                     double label_opt_objective) const;

  EngineConfig config_;
  const Scenario* scenario_;
  EngineState state_;
  std::vector<std::vector<int>> decision_cache_;  // [member][design] -> vertex
  std::vector<double> loss_sums_;                 // cumulative reweighted loss
  std::vector<int> draw_counts_;                  // labels drawn per design
  Rng sample_rng_;
  std::uint64_t label_seed_;
};

std::vector<IterationRow> run_engine(const EngineConfig& config,
                                     const Scenario& scenario);

}  // namespace iwsd

#endif  // IWSD_SAMPLER_HPP_
