#include "iwsd/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "iwsd/random.hpp"
#include "iwsd/scenario.hpp"

namespace iwsd {

std::string loss_kind_name(LossKind kind) {
  return kind == LossKind::kSpo ? "spo" : "l2";
}

double spo_loss(const Polytope& poly, const Vec& prediction, const Vec& label) {
  if (!(norm(prediction) > kNormEpsilon)) {
    throw std::invalid_argument("spo_loss: prediction is not normalizable");
  }
  if (!all_finite(label)) {
    throw std::invalid_argument("spo_loss: non-finite label");
  }
  const OracleResult acted = linear_oracle(poly, prediction);
  const OracleResult best = linear_oracle(poly, label);
  return dot(label, acted.decision) - best.objective;
}

double squared_loss(const Vec& prediction, const Vec& label) {
  return squared_distance(prediction, label);
}

namespace {

double point_loss(const Hypothesis& h, int design, const Vec& label,
                  LossKind kind, const Polytope& poly) {
  return kind == LossKind::kSpo ? spo_loss(poly, h.at(design), label)
                                : squared_loss(h.at(design), label);
}

}  // namespace

double reweighted_record_loss(const Hypothesis& h, const SampleRecord& rec,
                              const DesignPool& pool, LossKind kind,
                              const Polytope& poly) {
  const double pi = rec.pi[static_cast<std::size_t>(rec.design)];
  if (!(pi > 0.0)) {
    throw std::invalid_argument(
        "reweighted_record_loss: zero sampling probability for the realized "
        "design");
  }
  const double weight = pool.mu[static_cast<std::size_t>(rec.design)] / pi;
  return weight * point_loss(h, rec.design, rec.label, kind, poly);
}

double empirical_loss(const Hypothesis& h,
                      const std::vector<SampleRecord>& history,
                      const DesignPool& pool, LossKind kind,
                      const Polytope& poly) {
  if (history.empty()) {
    throw std::invalid_argument("empirical_loss: empty history");
  }
  double total = 0.0;
  for (const SampleRecord& rec : history) {
    total += reweighted_record_loss(h, rec, pool, kind, poly);
  }
  return total / static_cast<double>(history.size());
}

double exact_excess_risk(const Hypothesis& h1, const Hypothesis& h2,
                         const Scenario& scenario) {
  if (!scenario.has_conditional_means()) {
    throw std::invalid_argument("exact_excess_risk: conditional means required");
  }
  double total = 0.0;
  for (int i = 0; i < scenario.pool.size(); ++i) {
    const Vec& mean = scenario.conditional_means[static_cast<std::size_t>(i)];
    const Vec w1 = linear_oracle(scenario.poly, h1.at(i)).decision;
    const Vec w2 = linear_oracle(scenario.poly, h2.at(i)).decision;
    total += scenario.pool.mu[static_cast<std::size_t>(i)] *
             (dot(mean, w1) - dot(mean, w2));
  }
  return total;
}

RiskEstimate risk_estimate(const Hypothesis& h, const Scenario& scenario,
                           int n_samples, std::uint64_t seed) {
  if (n_samples < 1) {
    throw std::invalid_argument("risk_estimate: n_samples must be >= 1");
  }
  if (scenario.has_support()) {
    double total = 0.0;
    for (int i = 0; i < scenario.pool.size(); ++i) {
      const double mu = scenario.pool.mu[static_cast<std::size_t>(i)];
      if (mu == 0.0) continue;
      for (const SupportPoint& sp : scenario.support[static_cast<std::size_t>(i)]) {
        if (sp.prob == 0.0) continue;
        total += mu * sp.prob * spo_loss(scenario.poly, h.at(i), sp.label);
      }
    }
    return RiskEstimate{total, 0.0, RiskMethod::kExact};
  }

  constexpr int kStreams = 32;
  double sum = 0.0;
  double sum_sq = 0.0;
  int done = 0;
  for (int s = 0; s < kStreams; ++s) {
    const int chunk = n_samples / kStreams + (s < n_samples % kStreams ? 1 : 0);
    Rng rng = make_rng(derive_seed(seed, static_cast<std::uint64_t>(s)));
    double part = 0.0;
    double part_sq = 0.0;
    for (int k = 0; k < chunk; ++k) {
      const double u = uniform01(rng);
      int design = 0;
      double acc = 0.0;
      for (int i = 0; i < scenario.pool.size(); ++i) {
        acc += scenario.pool.mu[static_cast<std::size_t>(i)];
        if (u < acc) {
          design = i;
          break;
        }
        design = i;
      }
      const Vec label = scenario.draw_label(design, rng);
      const double loss = spo_loss(scenario.poly, h.at(design), label);
      part += loss;
      part_sq += loss * loss;
    }
    sum += part;
    sum_sq += part_sq;
    done += chunk;
  }
  const double mean = sum / done;
  const double var = std::max(0.0, sum_sq / done - mean * mean);
  const double se = std::sqrt(var / done);
  return RiskEstimate{mean, se, RiskMethod::kMonteCarlo};
}

double omega_max_spo(const Polytope& poly, const HypothesisClass& cls,
                     const Scenario& scenario) {
  if (cls.size() == 0) throw std::invalid_argument("omega_max_spo: empty class");
  if (!scenario.has_support()) {
    return scenario.rho_c * diameter(poly);
  }
  // Decisions reachable from any prediction in the class range.
  std::vector<int> decisions;
  for (const Hypothesis& h : cls.members) {
    for (int i = 0; i < cls.num_designs(); ++i) {
      const int v = linear_oracle(poly, h.at(i)).vertex_index;
      if (std::find(decisions.begin(), decisions.end(), v) == decisions.end()) {
        decisions.push_back(v);
      }
    }
  }
  double worst = 0.0;
  for (const auto& design_support : scenario.support) {
    for (const SupportPoint& sp : design_support) {
      const double opt = linear_oracle(poly, sp.label).objective;
      for (int v : decisions) {
        worst = std::max(worst, dot(sp.label, poly.vertex(v)) - opt);
      }
    }
  }
  return worst;
}

double lipschitz_constant(double diameter, double rho, double eta) {
  if (!(eta > 0.0)) {
    throw std::invalid_argument("lipschitz_constant: eta must be > 0");
  }
  return diameter * rho / (2.0 * eta);
}

}  // namespace iwsd
