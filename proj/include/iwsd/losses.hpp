#ifndef IWSD_LOSSES_HPP_
#define IWSD_LOSSES_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "iwsd/geometry.hpp"
#include "iwsd/hypotheses.hpp"
#include "iwsd/linalg.hpp"
#include "iwsd/sample_record.hpp"

namespace iwsd {

struct Scenario;

enum class LossKind { kSpo, kSquaredL2 };

std::string loss_kind_name(LossKind kind);

enum class RiskMethod { kExact, kMonteCarlo, kTestSet };

struct RiskEstimate {
  double value;
  double standard_error;  // 0 when method == kExact
  RiskMethod method;
};

// Excess downstream cost of acting on `prediction` when the realized cost is
// `label`: label . w*(prediction) - label . w*(label). Nonnegative.
double spo_loss(const Polytope& poly, const Vec& prediction, const Vec& label);

double squared_loss(const Vec& prediction, const Vec& label);

// mu(x_i) / pi_i * loss(h(x_i), label) for the design realized in `rec`.
// The indicator picks out exactly the sampled design.
double reweighted_record_loss(const Hypothesis& h, const SampleRecord& rec,
                              const DesignPool& pool, LossKind kind,
                              const Polytope& poly);

// Mean of per-record reweighted losses, each weighted by the pi stored at
// its own collection time.
double empirical_loss(const Hypothesis& h,
                      const std::vector<SampleRecord>& history,
                      const DesignPool& pool, LossKind kind,
                      const Polytope& poly);

// R(h1) - R(h2) computed exactly from conditional means:
// sum_i mu_i E[c|x_i] . (w*(h1(x_i)) - w*(h2(x_i))). The realized-optimum
// term cancels in the difference, so no label enumeration is needed.
double exact_excess_risk(const Hypothesis& h1, const Hypothesis& h2,
                         const Scenario& scenario);

// Exact weighted sum when the scenario has finite support; Monte Carlo with
// a reported standard error otherwise. Monte Carlo partitions the draws into
// seeded streams combined in stream order.
RiskEstimate risk_estimate(const Hypothesis& h, const Scenario& scenario,
                           int n_samples, std::uint64_t seed);

// Maximum SPO loss over (prediction-induced decision, label) pairs when the
// support is finite; the product bound rho * diameter otherwise.
double omega_max_spo(const Polytope& poly, const HypothesisClass& cls,
                     const Scenario& scenario);

// diameter * rho / (2 * eta).
double lipschitz_constant(double diameter, double rho, double eta);

}  // namespace iwsd

#endif  // IWSD_LOSSES_HPP_
