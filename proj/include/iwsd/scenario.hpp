#ifndef IWSD_SCENARIO_HPP_
#define IWSD_SCENARIO_HPP_

#include <functional>
#include <vector>

#include "iwsd/geometry.hpp"
#include "iwsd/hypotheses.hpp"
#include "iwsd/linalg.hpp"
#include "iwsd/random.hpp"

namespace iwsd {

struct SupportPoint {
  double prob;
  Vec label;
};

// A problem instance: pool, feasible region, label model, hypothesis class,
// and whatever exact conditional information the label model admits.
struct Scenario {
  DesignPool pool;
  Polytope poly;
  HypothesisClass hypotheses;
  double rho_c = 0.0;  // radius bound on the label space

  // Draws one label for a design. Deterministic in the rng state, so
  // concurrent runs with independent streams never interact.
  std::function<Vec(int design, Rng& rng)> label_oracle;

  // Finite conditional support per design, empty when the label distribution
  // is continuous.
  std::vector<std::vector<SupportPoint>> support;

  // Exact conditional first and second moments, empty when unavailable.
  // conditional_sq_norms[i] = E[|c|^2 | design i].
  std::vector<Vec> conditional_means;
  Vec conditional_sq_norms;

  bool has_support() const { return !support.empty(); }
  bool has_conditional_means() const { return !conditional_means.empty(); }

  Vec draw_label(int design, Rng& rng) const { return label_oracle(design, rng); }
};

}  // namespace iwsd

#endif  // IWSD_SCENARIO_HPP_
