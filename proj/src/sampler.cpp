#include "iwsd/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace iwsd {

std::string MethodSpec::name() const {
  const std::string u =
      uncertainty == Uncertainty::kDirectional ? "directional" : "euclidean";
  return u + "_" + loss_kind_name(elimination_loss);
}

MethodSpec MethodSpec::parse(const std::string& name) {
  for (const MethodSpec& m : all()) {
    if (m.name() == name) return m;
  }
  throw std::invalid_argument("unknown method: " + name);
}

std::vector<MethodSpec> MethodSpec::all() {
  return {
      {Uncertainty::kDirectional, LossKind::kSpo},
      {Uncertainty::kEuclidean, LossKind::kSpo},
      {Uncertainty::kDirectional, LossKind::kSquaredL2},
      {Uncertainty::kEuclidean, LossKind::kSquaredL2},
  };
}

Vec uncertainty_scores(const std::vector<int>& active,
                       const HypothesisClass& cls, Uncertainty kind) {
  const int m = cls.num_designs();
  Vec scores(static_cast<std::size_t>(m), 0.0);
  if (active.size() < 2) return scores;
  for (int i = 0; i < m; ++i) {
    double worst = 0.0;
    for (std::size_t a = 0; a < active.size(); ++a) {
      for (std::size_t b = a + 1; b < active.size(); ++b) {
        const Vec& pa = cls.member(active[a]).at(i);
        const Vec& pb = cls.member(active[b]).at(i);
        const double diff = kind == Uncertainty::kDirectional
                                ? distance(normalized(pa), normalized(pb))
                                : distance(pa, pb);
        worst = std::max(worst, diff);
      }
    }
    scores[static_cast<std::size_t>(i)] = worst;
  }
  return scores;
}

std::optional<Vec> sampling_distribution(const Vec& scores) {
  double total = 0.0;
  for (double p : scores) {
    if (p < 0.0) {
      throw std::invalid_argument("sampling_distribution: negative score");
    }
    total += p;
  }
  if (total <= 1e-15) return std::nullopt;
  Vec pi(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) pi[i] = scores[i] / total;
  return pi;
}

double update_slackness(double r_t, int t) {
  if (t < 1) throw std::invalid_argument("update_slackness: t must be >= 1");
  if (!(r_t > 0.0)) throw std::invalid_argument("update_slackness: r_t must be > 0");
  const double td = static_cast<double>(t);
  return r_t * std::sqrt(td / (td + 1.0) * std::log(2.0 * (td + 1.0)) /
                         std::log(2.0 * td));
}

double default_r0(double omega, double gamma, double lipschitz, int class_size,
                  double delta) {
  if (!(delta > 0.0) || delta > 1.0) {
    throw std::invalid_argument("default_r0: delta must be in (0, 1]");
  }
  const double margin_term =
      2.0 * gamma * lipschitz *
      std::sqrt(std::log(2.0 * static_cast<double>(class_size) / delta));
  return std::max(2.0 * omega, margin_term);
}

long long stopping_time_bound(double epsilon, double delta, double gamma,
                              double lipschitz, int class_size) {
  if (!(epsilon > 0.0) || !(delta > 0.0)) {
    throw std::invalid_argument("stopping_time_bound: epsilon, delta must be > 0");
  }
  const double gl = 4.0 * gamma * lipschitz;
  const double value =
      3.0 * gl * gl / (epsilon * epsilon) *
      std::log(2.0 * static_cast<double>(class_size) / (epsilon * epsilon * delta));
  return static_cast<long long>(std::ceil(value));
}

double risk_bound_at(int horizon, double gamma, double lipschitz,
                     int class_size, double delta) {
  if (horizon < 1) throw std::invalid_argument("risk_bound_at: horizon must be >= 1");
  const double td = static_cast<double>(horizon);
  return 4.0 * gamma * lipschitz *
         std::sqrt(std::log(2.0 * td * static_cast<double>(class_size) / delta) / td);
}

Engine::Engine(EngineConfig config, const Scenario& scenario)
    : config_(config), scenario_(&scenario) {
  if (config_.horizon < 1) throw std::invalid_argument("Engine: horizon must be >= 1");
  if (!(config_.r0 > 0.0)) throw std::invalid_argument("Engine: r0 must be > 0");
  if (!(config_.delta > 0.0) || config_.delta > 1.0) {
    throw std::invalid_argument("Engine: delta must be in (0, 1]");
  }
  const HypothesisClass& cls = scenario.hypotheses;
  const int n = cls.size();
  const int m = cls.num_designs();
  state_.active.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) state_.active[static_cast<std::size_t>(i)] = i;
  state_.slackness = config_.r0;  // r_1 = r_0
  state_.best = 0;
  loss_sums_.assign(static_cast<std::size_t>(n), 0.0);
  draw_counts_.assign(static_cast<std::size_t>(m), 0);
  // Predictions are static, so each member's downstream decision per design
  // is resolved once.
  decision_cache_.resize(static_cast<std::size_t>(n));
  for (int h = 0; h < n; ++h) {
    decision_cache_[static_cast<std::size_t>(h)].resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
      decision_cache_[static_cast<std::size_t>(h)][static_cast<std::size_t>(i)] =
          linear_oracle(scenario.poly, cls.member(h).at(i)).vertex_index;
    }
  }
  sample_rng_ = make_rng(derive_seed(config_.seed, 0xde51f7ull));
  label_seed_ = derive_seed(config_.label_seed.value_or(config_.seed), 0x1abe15ull);
}

double Engine::member_loss(int member, int design, const Vec& label,
                           double label_opt_objective) const {
  const HypothesisClass& cls = scenario_->hypotheses;
  if (config_.method.elimination_loss == LossKind::kSpo) {
    const int v = decision_cache_[static_cast<std::size_t>(member)]
                                 [static_cast<std::size_t>(design)];
    return dot(label, scenario_->poly.vertex(v)) - label_opt_objective;
  }
  return squared_loss(cls.member(member).at(design), label);
}

IterationRow Engine::step() {
  if (state_.status != EngineStatus::kRunning) {
    throw std::logic_error("Engine::step: engine is not running");
  }
  const HypothesisClass& cls = scenario_->hypotheses;
  const DesignPool& pool = scenario_->pool;
  const int t = state_.t + 1;
  const double r_t = state_.slackness;

  const Vec scores =
      uncertainty_scores(state_.active, cls, config_.method.uncertainty);
  const std::optional<Vec> pi = sampling_distribution(scores);
  if (!pi.has_value()) {
    state_.status = EngineStatus::kStoppedZeroUncertainty;
    return IterationRow{t, -1, static_cast<int>(state_.active.size()), r_t,
                        state_.best, true};
  }

  // Inverse-CDF draw keeps the sampling deterministic given the stream.
  const double u = uniform01(sample_rng_);
  int design = pool.size() - 1;
  double acc = 0.0;
  for (int i = 0; i < pool.size(); ++i) {
    acc += (*pi)[static_cast<std::size_t>(i)];
    if (u < acc) {
      design = i;
      break;
    }
  }

  const int draw_index = draw_counts_[static_cast<std::size_t>(design)]++;
  Rng label_rng = make_rng(
      derive_seed(derive_seed(label_seed_, static_cast<std::uint64_t>(design)),
                  static_cast<std::uint64_t>(draw_index)));
  const Vec label = scenario_->draw_label(design, label_rng);

  state_.t = t;
  state_.history.push_back(SampleRecord{t, design, label, *pi, design});

  double weight = pool.mu[static_cast<std::size_t>(design)] /
                  (*pi)[static_cast<std::size_t>(design)];
  if (config_.weight_clip.has_value()) {
    weight = std::min(weight, *config_.weight_clip);
  }
  const double label_opt = linear_oracle(scenario_->poly, label).objective;
  for (int h : state_.active) {
    loss_sums_[static_cast<std::size_t>(h)] +=
        weight * member_loss(h, design, label, label_opt);
  }

  // Selection and elimination both range over the pre-elimination survivors.
  int best = state_.active.front();
  double best_loss = loss_sums_[static_cast<std::size_t>(best)];
  for (int h : state_.active) {
    const double loss = loss_sums_[static_cast<std::size_t>(h)];
    if (loss < best_loss) {
      best = h;
      best_loss = loss;
    }
  }
  state_.best = best;

  std::vector<int> survivors;
  const double threshold = best_loss / t + r_t;
  for (int h : state_.active) {
    if (loss_sums_[static_cast<std::size_t>(h)] / t <= threshold) {
      survivors.push_back(h);
    }
  }
  state_.active = std::move(survivors);
  state_.slackness = update_slackness(r_t, t);
  if (t >= config_.horizon) state_.status = EngineStatus::kFinished;

  return IterationRow{t, design, static_cast<int>(state_.active.size()), r_t,
                      state_.best, false};
}

std::vector<IterationRow> Engine::run() {
  std::vector<IterationRow> rows;
  while (state_.status == EngineStatus::kRunning) {
    rows.push_back(step());
  }
  return rows;
}

std::vector<IterationRow> run_engine(const EngineConfig& config,
                                     const Scenario& scenario) {
  Engine engine(config, scenario);
  return engine.run();
}

}  // namespace iwsd
