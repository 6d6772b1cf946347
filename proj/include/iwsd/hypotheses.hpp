#ifndef IWSD_HYPOTHESES_HPP_
#define IWSD_HYPOTHESES_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "iwsd/geometry.hpp"
#include "iwsd/linalg.hpp"
#include "json.hpp"

namespace iwsd {

struct Scenario;

// Finite design set with a known marginal.
struct DesignPool {
  std::vector<std::string> design_ids;
  Vec mu;                          // probability over designs, sums to 1
  std::vector<Vec> features;       // optional, empty when designs are abstract

  int size() const { return static_cast<int>(design_ids.size()); }
  void validate() const;

  // Schema: {"ids": [...], "mu": [...]}
  static DesignPool from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

DesignPool make_design_pool(std::vector<std::string> ids, Vec mu);
DesignPool uniform_design_pool(int m);

// A prediction map stored pre-evaluated on the pool: row i = prediction at
// design i. Every row must be normalizable.
struct Hypothesis {
  std::string id;
  std::vector<Vec> predictions;  // m rows of dimension d

  const Vec& at(int design) const {
    return predictions[static_cast<std::size_t>(design)];
  }
};

struct HypothesisClass {
  std::vector<Hypothesis> members;

  int size() const { return static_cast<int>(members.size()); }
  int num_designs() const {
    return members.empty() ? 0 : static_cast<int>(members[0].predictions.size());
  }
  int dim() const {
    return num_designs() == 0 ? 0
                              : static_cast<int>(members[0].predictions[0].size());
  }
  const Hypothesis& member(int i) const {
    return members[static_cast<std::size_t>(i)];
  }
  void validate() const;

  // Schema: {"designs": m, "dim": d,
  //          "members": [{"id": str, "predictions": [[...]]}, ...]}
  static HypothesisClass from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

HypothesisClass make_hypothesis_class(std::vector<Hypothesis> members);

// Euclidean distance between the unit-normalized predictions of two members
// at one design; lies in [0, 2].
double directional_difference(const Hypothesis& a, const Hypothesis& b,
                              int design);

// Sum over designs of the maximum pairwise directional difference across the
// class. Zero for a singleton class.
double gamma_constant(const HypothesisClass& cls, const DesignPool& pool);

// min over (member, design) of nu(h(x)) / |h(x)|. Zero signals a prediction
// on a cone boundary.
double eta_margin(const HypothesisClass& cls, const DesignPool& pool,
                  const Polytope& poly);

struct ConeAnchor {
  int vertex_index;
  Vec cost;       // unit norm, strictly optimizes vertex_index
  double margin;  // nu(cost), equals nu/|cost| since |cost| = 1
};

struct ConeAnchorSet {
  std::vector<ConeAnchor> anchors;
  std::vector<int> skipped_vertices;  // vertices with no strict normal cone

  const ConeAnchor* find(int vertex_index) const;
  double min_margin() const;
};

inline constexpr std::uint64_t kAnchorSearchSeed = 0x5eedau;

// For each vertex with a nonempty strict normal cone, searches for a
// unit-norm cost vector maximizing the normalized margin to all other
// vertices: 512 seeded random restarts plus coordinate-wise refinement.
// Vertices that are never uniquely optimal are reported in
// skipped_vertices.
ConeAnchorSet cone_anchors(const Polytope& poly,
                           std::uint64_t seed = kAnchorSearchSeed);

struct AugmentLog {
  int rows_replaced = 0;
  int boundary_rows = 0;  // replaced rows that sat on a cone boundary
};

// Replaces every prediction row with normalized margin below eta by the
// anchor of the cone containing it (tie-broken by the oracle), leaving all
// other rows untouched. The output class has eta_margin >= eta and identical
// per-design oracle decisions.
HypothesisClass augment_class(const HypothesisClass& cls, const Polytope& poly,
                              const ConeAnchorSet& anchors, double eta,
                              AugmentLog* log = nullptr);

// mu_lb * eta * c_lb * gamma_lb; every factor must be positive.
double gap_lower_bound(double mu_lb, double eta, double c_lb, double gamma_lb);

// Member indices whose exact risk is within kCoOptimalTolerance of the class
// minimum. Requires exact conditional means on the scenario.
inline constexpr double kCoOptimalTolerance = 1e-10;
std::vector<int> optimal_members(const HypothesisClass& cls,
                                 const Scenario& scenario);

// Minimum exact excess risk over suboptimal members; +infinity when every
// member is co-optimal.
double measured_gap(const HypothesisClass& cls, const Scenario& scenario);

// min(2, min over optimal members and designs of nu(h(x)/|h(x)|)): the
// largest uniform perturbation of normalized optimal predictions that leaves
// every downstream decision unchanged.
double safe_perturbation_bound(const HypothesisClass& cls,
                               const std::vector<int>& optimal,
                               const DesignPool& pool, const Polytope& poly);

}  // namespace iwsd

#endif  // IWSD_HYPOTHESES_HPP_
