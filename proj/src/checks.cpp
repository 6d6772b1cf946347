#include "iwsd/checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "iwsd/harness.hpp"
#include "iwsd/losses.hpp"
#include "iwsd/sampler.hpp"
#include "iwsd/scenarios.hpp"

namespace iwsd {

namespace {

constexpr double kPi = 3.14159265358979323846;

void record_failure(PropertyResult& result, const std::string& detail) {
  result.failures += 1;
  if (result.detail.empty()) result.detail = detail;
}

int random_int(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(uniform01(rng) * (hi - lo + 1)) % (hi - lo + 1);
}

}  // namespace

Polytope random_polytope(Rng& rng, int dim_lo, int dim_hi, int verts_lo,
                         int verts_hi) {
  const int d = random_int(rng, dim_lo, dim_hi);
  const int k = random_int(rng, verts_lo, verts_hi);
  std::vector<Vec> vertices;
  while (static_cast<int>(vertices.size()) < k) {
    Vec v(static_cast<std::size_t>(d));
    for (double& x : v) x = 2.0 * normal_draw(rng);
    bool far_enough = true;
    for (const Vec& u : vertices) {
      if (distance(u, v) < 1e-2) {
        far_enough = false;
        break;
      }
    }
    if (far_enough) vertices.push_back(std::move(v));
  }
  return Polytope(d, std::move(vertices));
}

Vec random_unit(Rng& rng, int d) {
  while (true) {
    Vec v(static_cast<std::size_t>(d));
    for (double& x : v) x = normal_draw(rng);
    const double n = norm(v);
    if (n > 1e-6) return scaled(v, 1.0 / n);
  }
}

Vec random_nonzero(Rng& rng, int d, double scale) {
  while (true) {
    Vec v(static_cast<std::size_t>(d));
    for (double& x : v) x = scale * normal_draw(rng);
    if (norm(v) > 1e-3 * scale) return v;
  }
}

Scenario random_finite_scenario(Rng& rng) {
  Polytope poly = random_polytope(rng, 2, 4, 3, 5);
  const int d = poly.dimension();
  const int m = random_int(rng, 2, 4);

  Vec mu(static_cast<std::size_t>(m));
  double total = 0.0;
  for (double& p : mu) {
    p = 0.2 + uniform01(rng);
    total += p;
  }
  for (double& p : mu) p /= total;

  Scenario scenario{make_design_pool(uniform_design_pool(m).design_ids, mu),
                    std::move(poly),
                    HypothesisClass{},
                    0.0,
                    nullptr,
                    {},
                    {},
                    {}};
  scenario.support.resize(static_cast<std::size_t>(m));
  scenario.conditional_means.resize(static_cast<std::size_t>(m));
  scenario.conditional_sq_norms.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const int atoms = random_int(rng, 2, 3);
    Vec probs(static_cast<std::size_t>(atoms));
    double ptotal = 0.0;
    for (double& p : probs) {
      p = 0.1 + uniform01(rng);
      ptotal += p;
    }
    for (double& p : probs) p /= ptotal;
    Vec mean(static_cast<std::size_t>(d), 0.0);
    double sq = 0.0;
    for (int a = 0; a < atoms; ++a) {
      Vec label = random_nonzero(rng, d, 1.5);
      scenario.rho_c = std::max(scenario.rho_c, norm(label));
      sq += probs[static_cast<std::size_t>(a)] * squared_norm(label);
      for (int c = 0; c < d; ++c) {
        mean[static_cast<std::size_t>(c)] +=
            probs[static_cast<std::size_t>(a)] * label[static_cast<std::size_t>(c)];
      }
      scenario.support[static_cast<std::size_t>(i)].push_back(
          SupportPoint{probs[static_cast<std::size_t>(a)], std::move(label)});
    }
    scenario.conditional_means[static_cast<std::size_t>(i)] = std::move(mean);
    scenario.conditional_sq_norms[static_cast<std::size_t>(i)] = sq;
  }
  std::vector<std::vector<SupportPoint>> support = scenario.support;
  scenario.label_oracle = [support](int design, Rng& r) {
    const auto& atoms = support[static_cast<std::size_t>(design)];
    const double u = uniform01(r);
    double acc = 0.0;
    for (const SupportPoint& sp : atoms) {
      acc += sp.prob;
      if (u < acc) return sp.label;
    }
    return atoms.back().label;
  };

  const int n_members = random_int(rng, 2, 4);
  std::vector<Hypothesis> members;
  for (int h = 0; h < n_members; ++h) {
    Hypothesis hyp{"h" + std::to_string(h + 1), {}};
    for (int i = 0; i < m; ++i) hyp.predictions.push_back(random_nonzero(rng, d, 2.0));
    members.push_back(std::move(hyp));
  }
  scenario.hypotheses = make_hypothesis_class(std::move(members));
  return scenario;
}

std::vector<Scenario> gap_condition_scenarios(int count, std::uint64_t seed) {
  std::vector<Scenario> out;
  Rng rng = make_rng(derive_seed(seed, 0x9a9cull));
  while (static_cast<int>(out.size()) < count) {
    const bool counterexample_kind = out.size() % 2 == 0;
    if (counterexample_kind) {
      // Rotation above the bisector keeps the class margin strictly below
      // the mean margin, so the product bound is slack.
      const double theta = 0.5 + 0.7 * uniform01(rng);
      const double rotation = theta * (0.55 + 0.35 * uniform01(rng));
      const double mean_norm = 1.0 + 2.0 * uniform01(rng);
      const double sigma = 0.05 + 0.25 * uniform01(rng);
      out.push_back(counterexample_scenario(theta, mean_norm, sigma, rotation));
    } else {
      const double ratio = 2.0 + 10.0 * uniform01(rng);
      const int m = random_int(rng, 8, 15);
      Vec rates(static_cast<std::size_t>(m));
      // Design 0 sits near the decision boundary: it pins the class margin
      // and keeps the bound away from the measured gap.
      rates[0] = 1.0 / (1.0 + ratio) + 0.015;
      for (int i = 1; i < m; ++i) {
        rates[static_cast<std::size_t>(i)] = 0.3 + 0.15 * uniform01(rng);
      }
      std::vector<int> flips;
      for (int i = 2; i < m; i += 3) flips.push_back(i);
      CostSensitiveSpec spec;
      spec.cost_matrix = cost_ratio_matrix(ratio);
      spec.positive_rates = rates;
      spec.class_spec = {{"kind", "mirrored"}, {"flip_designs", flips}};
      spec.seed = derive_seed(seed, out.size());
      out.push_back(cost_sensitive_scenario(spec));
    }
  }
  return out;
}

double brute_force_distance_to_degeneracy(const Polytope& poly, const Vec& cost) {
  const int k = poly.num_vertices();
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      const Vec edge = sub(poly.vertex(i), poly.vertex(j));
      const double edge_norm = norm(edge);
      const double offset = dot(cost, edge) / edge_norm;
      // Project onto the tie hyperplane of (i, j).
      Vec projected = cost;
      for (std::size_t c = 0; c < projected.size(); ++c) {
        projected[c] -= offset * edge[c] / edge_norm;
      }
      // Keep the candidate only if the tie is realized as co-optimal there.
      double min_obj = std::numeric_limits<double>::infinity();
      for (int v = 0; v < k; ++v) {
        min_obj = std::min(min_obj, dot(projected, poly.vertex(v)));
      }
      const double tol =
          1e-9 * (1.0 + norm(projected) * diameter(poly));
      if (dot(projected, poly.vertex(i)) <= min_obj + tol &&
          dot(projected, poly.vertex(j)) <= min_obj + tol) {
        best = std::min(best, std::abs(offset));
      }
    }
  }
  return best;
}

PropertyResult check_scale_invariance_with(
    const std::function<int(const Polytope&, const Vec&)>& oracle_vertex,
    std::uint64_t seed, int instances) {
  PropertyResult result{"losses/spo_scale_invariance", 0, 0, ""};
  Rng rng = make_rng(derive_seed(seed, 0x5ca1eull));
  const Vec alphas{0.5, 1.0, 3.0, 10.0};
  int made = 0;
  while (made < instances) {
    const Polytope poly = random_polytope(rng, 2, 4, 2, 8);
    const Vec prediction = random_nonzero(rng, poly.dimension(), 1.0);
    const Vec label = random_nonzero(rng, poly.dimension(), 1.0);
    // Keep instances away from exact ties: index equality under scaling is
    // only meaningful when no tolerance-window tie flips the winner.
    if (distance_to_degeneracy(poly, prediction) < 1e-6) continue;
    ++made;
    result.trials += 1;
    const int base_vertex = oracle_vertex(poly, prediction);
    const double base_loss = spo_loss(poly, prediction, label);
    for (double alpha : alphas) {
      const Vec scaled_prediction = scaled(prediction, alpha);
      if (oracle_vertex(poly, scaled_prediction) != base_vertex) {
        record_failure(result, "oracle vertex changed under scaling");
      }
      if (std::abs(spo_loss(poly, scaled_prediction, label) - base_loss) >
          1e-12) {
        record_failure(result, "SPO loss changed under scaling");
      }
    }
  }
  return result;
}

namespace {

PropertyResult check_oracle_objective(std::uint64_t seed) {
  PropertyResult result{"geometry/oracle_objective_is_minimum", 0, 0, ""};
  Rng rng = make_rng(derive_seed(seed, 1));
  for (int inst = 0; inst < 100; ++inst) {
    const Polytope poly = random_polytope(rng, 2, 4, 2, 40);
    const Vec cost = random_nonzero(rng, poly.dimension(), 2.0);
    const OracleResult res = linear_oracle(poly, cost);
    result.trials += 1;
    for (int v = 0; v < poly.num_vertices(); ++v) {
      if (res.objective > dot(cost, poly.vertex(v)) + kTieTolerance) {
        record_failure(result, "oracle objective above a vertex objective");
      }
    }
  }
  // One large instance, exhaustive over all vertices.
  std::vector<Vec> many;
  for (int i = 0; i < 10000; ++i) {
    Vec v(3);
    for (double& x : v) x = normal_draw(rng);
    many.push_back(std::move(v));
  }
  const Polytope big(3, std::move(many));
  const Vec cost = random_nonzero(rng, 3, 1.0);
  const OracleResult res = linear_oracle(big, cost);
  result.trials += 1;
  for (int v = 0; v < big.num_vertices(); ++v) {
    if (res.objective > dot(cost, big.vertex(v)) + kTieTolerance) {
      record_failure(result, "oracle objective above a vertex objective (big)");
    }
  }
  return result;
}

PropertyResult check_perturbation_stability(std::uint64_t seed) {
  PropertyResult result{"geometry/oracle_stable_below_degeneracy_distance", 0, 0,
                        ""};
  Rng rng = make_rng(derive_seed(seed, 2));
  for (int inst = 0; inst < 20; ++inst) {
    const Polytope poly = random_polytope(rng, 2, 3, 3, 8);
    Vec cost;
    double nu = 0.0;
    do {
      cost = random_nonzero(rng, poly.dimension(), 1.5);
      nu = distance_to_degeneracy(poly, cost);
    } while (nu < 1e-3);
    const int base = linear_oracle(poly, cost).vertex_index;
    for (int trial = 0; trial < 1000; ++trial) {
      result.trials += 1;
      const Vec dir = random_unit(rng, poly.dimension());
      const Vec perturbed = add(cost, scaled(dir, 0.999 * nu));
      if (linear_oracle(poly, perturbed).vertex_index != base) {
        record_failure(result, "oracle vertex changed inside the safe radius");
      }
    }
  }
  return result;
}

PropertyResult check_degeneracy_brute_force(std::uint64_t seed) {
  PropertyResult result{"geometry/degeneracy_matches_brute_force", 0, 0, ""};
  Rng rng = make_rng(derive_seed(seed, 3));
  for (int inst = 0; inst < 200; ++inst) {
    const Polytope poly = random_polytope(rng, 2, 3, 3, 8);
    const Vec cost = random_nonzero(rng, poly.dimension(), 1.5);
    result.trials += 1;
    const double closed = distance_to_degeneracy(poly, cost);
    const double brute = brute_force_distance_to_degeneracy(poly, cost);
    if (std::abs(closed - brute) > 1e-6) {
      std::ostringstream oss;
      oss << "closed " << closed << " vs brute " << brute;
      record_failure(result, oss.str());
    }
  }
  return result;
}

PropertyResult check_spo_bounds(std::uint64_t seed) {
  PropertyResult result{"losses/spo_nonnegative_and_cauchy_bounded", 0, 0, ""};
  Rng rng = make_rng(derive_seed(seed, 4));
  for (int inst = 0; inst < 500; ++inst) {
    const Polytope poly = random_polytope(rng, 2, 4, 2, 8);
    const Vec prediction = random_nonzero(rng, poly.dimension(), 1.5);
    const Vec label = random_nonzero(rng, poly.dimension(), 1.5);
    result.trials += 1;
    const double loss = spo_loss(poly, prediction, label);
    if (loss < -1e-12) record_failure(result, "negative SPO loss");
    if (loss > norm(label) * diameter(poly) + 1e-9) {
      record_failure(result, "SPO loss above |c| * diameter");
    }
  }
  return result;
}

PropertyResult check_spo_lipschitz(std::uint64_t seed) {
  PropertyResult result{"losses/spo_lipschitz_in_directional_difference", 0, 0,
                        ""};
  Rng rng = make_rng(derive_seed(seed, 5));
  int made = 0;
  while (made < 1000) {
    const Polytope poly = random_polytope(rng, 2, 3, 3, 8);
    const Vec p1 = random_nonzero(rng, poly.dimension(), 1.5);
    const Vec p2 = random_nonzero(rng, poly.dimension(), 1.5);
    const double eta =
        std::min(distance_to_degeneracy(poly, p1) / norm(p1),
                 distance_to_degeneracy(poly, p2) / norm(p2));
    if (eta < 1e-3) continue;
    ++made;
    result.trials += 1;
    const Vec label = random_nonzero(rng, poly.dimension(), 1.0);
    const double lhs =
        std::abs(spo_loss(poly, p1, label) - spo_loss(poly, p2, label));
    const double lipschitz =
        lipschitz_constant(diameter(poly), norm(label), eta);
    const double dd = distance(normalized(p1), normalized(p2));
    if (lhs > lipschitz * dd + 1e-9) {
      record_failure(result, "Lipschitz bound violated");
    }
  }
  return result;
}

PropertyResult check_unbiasedness(std::uint64_t seed) {
  PropertyResult result{"losses/reweighted_loss_unbiased", 0, 0, ""};
  for (int inst = 0; inst < 20; ++inst) {
    Rng rng = make_rng(derive_seed(seed, 600 + static_cast<std::uint64_t>(inst)));
    const Scenario scenario = random_finite_scenario(rng);
    const int m = scenario.pool.size();
    std::vector<int> everyone(static_cast<std::size_t>(scenario.hypotheses.size()));
    for (std::size_t i = 0; i < everyone.size(); ++i) everyone[i] = static_cast<int>(i);
    Vec scores = uncertainty_scores(everyone, scenario.hypotheses,
                                    Uncertainty::kDirectional);
    double total = 0.0;
    for (double s : scores) total += s;
    // Full-support mixture keeps the importance weights finite everywhere.
    Vec pi(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
      const double base = total > 0.0 ? scores[static_cast<std::size_t>(i)] / total
                                      : 0.0;
      pi[static_cast<std::size_t>(i)] = 0.5 * base + 0.5 / m;
    }
    const Hypothesis& h = scenario.hypotheses.member(0);
    const double exact = risk_estimate(h, scenario, 1, 0).value;

    const int n = 100000;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int k = 0; k < n; ++k) {
      const double u = uniform01(rng);
      int design = m - 1;
      double acc = 0.0;
      for (int i = 0; i < m; ++i) {
        acc += pi[static_cast<std::size_t>(i)];
        if (u < acc) {
          design = i;
          break;
        }
      }
      const Vec label = scenario.draw_label(design, rng);
      const SampleRecord rec{k + 1, design, label, pi, design};
      const double value = reweighted_record_loss(h, rec, scenario.pool,
                                                  LossKind::kSpo, scenario.poly);
      sum += value;
      sum_sq += value * value;
    }
    const double mean = sum / n;
    const double var = std::max(0.0, sum_sq / n - mean * mean);
    const double se = std::sqrt(var / n);
    result.trials += 1;
    if (std::abs(mean - exact) > 3.0 * se + 1e-12) {
      std::ostringstream oss;
      oss << "mean " << mean << " exact " << exact << " se " << se;
      record_failure(result, oss.str());
    }
  }
  return result;
}

PropertyResult check_excess_risk_nonnegative(std::uint64_t seed) {
  PropertyResult result{"losses/excess_risk_nonnegative_under_condition1", 0, 0,
                        ""};
  const std::vector<Scenario> scenarios = gap_condition_scenarios(10, seed);
  for (const Scenario& scenario : scenarios) {
    const std::vector<int> optimal = optimal_members(scenario.hypotheses, scenario);
    const Hypothesis& star = scenario.hypotheses.member(optimal.front());
    for (int i = 0; i < scenario.hypotheses.size(); ++i) {
      result.trials += 1;
      if (exact_excess_risk(scenario.hypotheses.member(i), star, scenario) <
          -1e-12) {
        record_failure(result, "negative excess risk against the optimum");
      }
    }
  }
  return result;
}

PropertyResult check_gamma_properties(std::uint64_t seed) {
  PropertyResult result{"hypotheses/gamma_zero_for_singleton_and_monotone", 0, 0,
                        ""};
  Rng rng = make_rng(derive_seed(seed, 7));
  for (int inst = 0; inst < 100; ++inst) {
    Rng inst_rng = make_rng(derive_seed(seed, 700 + static_cast<std::uint64_t>(inst)));
    const Scenario scenario = random_finite_scenario(inst_rng);
    const HypothesisClass& cls = scenario.hypotheses;
    result.trials += 1;
    const HypothesisClass singleton = make_hypothesis_class({cls.member(0)});
    DesignPool pool = scenario.pool;
    if (gamma_constant(singleton, pool) != 0.0) {
      record_failure(result, "singleton gamma not zero");
    }
    if (cls.size() >= 2) {
      const double full = gamma_constant(cls, pool);
      std::vector<Hypothesis> fewer = cls.members;
      fewer.erase(fewer.begin() + random_int(rng, 0, cls.size() - 1));
      const double shrunk = gamma_constant(make_hypothesis_class(fewer), pool);
      if (shrunk > full + 1e-15) {
        record_failure(result, "gamma grew under class shrinkage");
      }
    }
  }
  return result;
}

PropertyResult check_augmentation(std::uint64_t seed) {
  PropertyResult result{"hypotheses/augmentation_margin_and_decisions", 0, 0, ""};
  Rng rng = make_rng(derive_seed(seed, 8));
  int made = 0;
  while (made < 100) {
    const Polytope poly = random_polytope(rng, 2, 3, 3, 6);
    const ConeAnchorSet anchors =
        cone_anchors(poly, derive_seed(seed, 800 + static_cast<std::uint64_t>(made)));
    if (anchors.anchors.empty()) continue;
    const double eta0 = anchors.min_margin();
    const int d = poly.dimension();
    const int m = random_int(rng, 2, 3);
    const int n = random_int(rng, 2, 3);
    std::vector<Hypothesis> members;
    bool covered = true;
    bool below_margin = false;
    for (int h = 0; h < n && covered; ++h) {
      Hypothesis hyp{"h" + std::to_string(h + 1), {}};
      for (int i = 0; i < m; ++i) {
        Vec row;
        if (h == 0 && i == 0) {
          // Deliberately near-degenerate: a direction on (or close to) the
          // tie hyperplane of two random vertices.
          const int a = random_int(rng, 0, poly.num_vertices() - 1);
          int b = random_int(rng, 0, poly.num_vertices() - 1);
          if (b == a) b = (a + 1) % poly.num_vertices();
          const Vec edge = sub(poly.vertex(a), poly.vertex(b));
          Vec raw = random_nonzero(rng, d, 1.0);
          const double along = dot(raw, edge) / squared_norm(edge);
          for (int c = 0; c < d; ++c) {
            raw[static_cast<std::size_t>(c)] -= along * edge[static_cast<std::size_t>(c)];
          }
          if (norm(raw) < 1e-6) raw = random_nonzero(rng, d, 1.0);
          if (uniform01(rng) < 0.5) {
            raw = add(raw, scaled(random_unit(rng, d), 1e-11));
          }
          row = raw;
        } else {
          row = random_nonzero(rng, d, 1.5);
        }
        if (anchors.find(linear_oracle(poly, row).vertex_index) == nullptr) {
          covered = false;
          break;
        }
        hyp.predictions.push_back(std::move(row));
      }
      if (covered && !hyp.predictions.empty()) {
        for (const Vec& row : hyp.predictions) {
          if (distance_to_degeneracy(poly, row) / norm(row) < eta0) {
            below_margin = true;
          }
        }
        members.push_back(std::move(hyp));
      }
    }
    if (!covered || !below_margin || members.size() < 2) continue;
    ++made;
    result.trials += 1;
    const HypothesisClass cls = make_hypothesis_class(members);
    AugmentLog log;
    const HypothesisClass augmented =
        augment_class(cls, poly, anchors, eta0, &log);
    DesignPool pool = uniform_design_pool(m);
    if (eta_margin(augmented, pool, poly) < eta0) {
      record_failure(result, "augmented class margin below the requested eta");
    }
    if (log.rows_replaced < 1) {
      record_failure(result, "augmentation replaced no rows");
    }
    for (int h = 0; h < cls.size(); ++h) {
      for (int i = 0; i < m; ++i) {
        if (linear_oracle(poly, cls.member(h).at(i)).vertex_index !=
            linear_oracle(poly, augmented.member(h).at(i)).vertex_index) {
          record_failure(result, "augmentation changed a downstream decision");
        }
      }
    }
  }
  return result;
}

PropertyResult check_gap_bound(std::uint64_t seed) {
  PropertyResult result{"hypotheses/measured_gap_respects_product_bound", 0, 0,
                        ""};
  const std::vector<Scenario> scenarios = gap_condition_scenarios(50, seed);
  for (const Scenario& scenario : scenarios) {
    result.trials += 1;
    const ConditionReport report = verify_conditions(scenario);
    if (!report.all_pass() || !(report.eta > 0.0)) {
      record_failure(result, "generated scenario failed condition verification");
      continue;
    }
    const double bound =
        gap_lower_bound(report.mu_lb, report.eta, report.c_lb, report.gamma_lb);
    const double gap = measured_gap(scenario.hypotheses, scenario);
    if (!(gap >= bound)) {
      std::ostringstream oss;
      oss << "gap " << gap << " below bound " << bound;
      record_failure(result, oss.str());
    }
  }
  return result;
}

PropertyResult check_directional_metric(std::uint64_t seed) {
  PropertyResult result{"hypotheses/directional_difference_is_a_metric", 0, 0,
                        ""};
  Rng rng = make_rng(derive_seed(seed, 10));
  for (int inst = 0; inst < 300; ++inst) {
    const int d = random_int(rng, 2, 4);
    Hypothesis a{"a", {random_nonzero(rng, d, 2.0)}};
    Hypothesis b{"b", {random_nonzero(rng, d, 2.0)}};
    Hypothesis c{"c", {random_nonzero(rng, d, 2.0)}};
    result.trials += 1;
    if (directional_difference(a, a, 0) != 0.0) {
      record_failure(result, "identity violated");
    }
    if (directional_difference(a, b, 0) != directional_difference(b, a, 0)) {
      record_failure(result, "symmetry violated");
    }
    if (directional_difference(a, c, 0) >
        directional_difference(a, b, 0) + directional_difference(b, c, 0) +
            1e-12) {
      record_failure(result, "triangle inequality violated");
    }
    const double dd = directional_difference(a, b, 0);
    if (dd < 0.0 || dd > 2.0 + 1e-12) {
      record_failure(result, "directional difference outside [0, 2]");
    }
  }
  return result;
}

bool is_subset(const std::vector<int>& inner, const std::vector<int>& outer) {
  for (int x : inner) {
    if (std::find(outer.begin(), outer.end(), x) == outer.end()) return false;
  }
  return true;
}

PropertyResult check_engine_invariants(std::uint64_t seed) {
  PropertyResult result{"sampler/confidence_sets_nested_and_run_deterministic",
                        0, 0, ""};
  const std::vector<MethodSpec> methods = MethodSpec::all();
  for (int inst = 0; inst < 20; ++inst) {
    Rng rng = make_rng(derive_seed(seed, 1100 + static_cast<std::uint64_t>(inst)));
    const Scenario scenario = random_finite_scenario(rng);
    EngineConfig config;
    config.method = methods[static_cast<std::size_t>(inst) % methods.size()];
    config.horizon = 30;
    config.r0 = 0.3 + uniform01(rng);
    config.seed = derive_seed(seed, 5000 + static_cast<std::uint64_t>(inst));

    Engine engine(config, scenario);
    std::vector<int> prev_active = engine.state().active;
    Vec prev_scores = uncertainty_scores(prev_active, scenario.hypotheses,
                                         config.method.uncertainty);
    std::vector<IterationRow> rows;
    while (engine.state().status == EngineStatus::kRunning) {
      const IterationRow row = engine.step();
      rows.push_back(row);
      result.trials += 1;
      if (row.stopped) break;
      const std::vector<int>& active = engine.state().active;
      if (!is_subset(active, prev_active)) {
        record_failure(result, "active set not nested");
      }
      if (std::find(prev_active.begin(), prev_active.end(), row.best) ==
          prev_active.end()) {
        record_failure(result, "best outside the pre-elimination set");
      }
      if (std::find(active.begin(), active.end(), row.best) == active.end()) {
        record_failure(result, "empirical minimizer eliminated at its own step");
      }
      const SampleRecord& rec = engine.state().history.back();
      double total = 0.0;
      for (std::size_t i = 0; i < rec.pi.size(); ++i) {
        const double p = rec.pi[i];
        if (p < 0.0) record_failure(result, "negative sampling probability");
        if ((p > 0.0) != (prev_scores[i] > 0.0)) {
          record_failure(result, "pi support differs from score support");
        }
        total += p;
      }
      if (std::abs(total - 1.0) > 1e-12) {
        record_failure(result, "sampling distribution does not sum to 1");
      }
      if (!(rec.pi[static_cast<std::size_t>(rec.design)] > 0.0)) {
        record_failure(result, "sampled design has zero probability");
      }
      const Vec scores = uncertainty_scores(active, scenario.hypotheses,
                                            config.method.uncertainty);
      for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i] > prev_scores[i]) {
          record_failure(result, "uncertainty score increased over time");
        }
      }
      prev_active = active;
      prev_scores = scores;
    }

    // Replaying the same seed must reproduce the run exactly.
    const std::vector<IterationRow> replay = run_engine(config, scenario);
    result.trials += 1;
    bool same = replay.size() == rows.size();
    for (std::size_t i = 0; same && i < rows.size(); ++i) {
      same = replay[i].t == rows[i].t && replay[i].design == rows[i].design &&
             replay[i].n_active == rows[i].n_active &&
             replay[i].slackness == rows[i].slackness &&
             replay[i].best == rows[i].best &&
             replay[i].stopped == rows[i].stopped;
    }
    if (!same) record_failure(result, "replay with the same seed diverged");
  }
  return result;
}

PropertyResult check_uncertainty_monotone(std::uint64_t seed) {
  PropertyResult result{"sampler/uncertainty_monotone_under_shrinkage", 0, 0,
                        ""};
  for (int inst = 0; inst < 100; ++inst) {
    Rng rng = make_rng(derive_seed(seed, 1200 + static_cast<std::uint64_t>(inst)));
    const Scenario scenario = random_finite_scenario(rng);
    const int n = scenario.hypotheses.size();
    std::vector<int> everyone(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) everyone[static_cast<std::size_t>(i)] = i;
    std::vector<int> subset;
    for (int i = 0; i < n; ++i) {
      if (uniform01(rng) < 0.6) subset.push_back(i);
    }
    if (subset.empty()) subset.push_back(0);
    for (Uncertainty kind : {Uncertainty::kDirectional, Uncertainty::kEuclidean}) {
      result.trials += 1;
      const Vec full = uncertainty_scores(everyone, scenario.hypotheses, kind);
      const Vec small = uncertainty_scores(subset, scenario.hypotheses, kind);
      for (std::size_t i = 0; i < full.size(); ++i) {
        if (small[i] > full[i]) {
          record_failure(result, "subset score above superset score");
        }
      }
    }
  }
  return result;
}

PropertyResult check_slackness_schedule(std::uint64_t) {
  PropertyResult result{"sampler/slackness_schedule_matches_closed_form", 0, 0,
                        ""};
  const double r1 = 5.0;
  double r = r1;
  result.trials += 1;
  if (update_slackness(r1, 1) != r1) {
    record_failure(result, "r_2 differs from r_1");
  }
  const double log2 = std::log(2.0);
  for (int t = 1; t <= 100000; ++t) {
    r = update_slackness(r, t);
    const double closed =
        r1 * std::sqrt(std::log(2.0 * (t + 1.0)) / ((t + 1.0) * log2));
    result.trials += 1;
    if (std::abs(r - closed) > 1e-12) {
      std::ostringstream oss;
      oss << "t " << t + 1 << " iterated " << r << " closed " << closed;
      record_failure(result, oss.str());
      break;
    }
  }
  // Strictly decreasing from t = 2 on.
  r = update_slackness(r1, 1);
  for (int t = 2; t <= 1000; ++t) {
    const double next = update_slackness(r, t);
    result.trials += 1;
    if (!(next < r)) record_failure(result, "slackness not strictly decreasing");
    r = next;
  }
  return result;
}

PropertyResult check_normalization_example_sampling(std::uint64_t seed) {
  PropertyResult result{"sampler/normalization_example_design_selection", 0, 0,
                        ""};
  const Scenario scenario = normalization_example_scenario(0.5);
  const std::vector<int> both{0, 1};
  const Vec directional =
      uncertainty_scores(both, scenario.hypotheses, Uncertainty::kDirectional);
  const Vec euclidean =
      uncertainty_scores(both, scenario.hypotheses, Uncertainty::kEuclidean);
  result.trials += 1;
  if (directional[1] != 0.0) {
    record_failure(result, "directional score of the shared-direction design "
                           "is nonzero");
  }
  const std::optional<Vec> pi = sampling_distribution(euclidean);
  result.trials += 1;
  if (!pi.has_value() || !((*pi)[1] > (*pi)[0])) {
    record_failure(result,
                   "euclidean sampling does not favor the wide-norm design");
  }
  // Under directional scoring with squared-loss elimination the second
  // design is never sampled.
  for (int rep = 0; rep < 20; ++rep) {
    EngineConfig config;
    config.method = MethodSpec{Uncertainty::kDirectional, LossKind::kSquaredL2};
    config.horizon = 50;
    config.r0 = auto_r0(LossKind::kSquaredL2);
    config.seed = derive_seed(seed, 1300 + static_cast<std::uint64_t>(rep));
    const std::vector<IterationRow> rows = run_engine(config, scenario);
    result.trials += 1;
    for (const IterationRow& row : rows) {
      if (row.design == 1) {
        record_failure(result, "shared-direction design was sampled");
      }
    }
  }
  return result;
}

PropertyResult check_label_radius(std::uint64_t seed) {
  PropertyResult result{"scenarios/labels_match_dimension_and_radius", 0, 0, ""};
  std::vector<Scenario> scenarios;
  {
    CostSensitiveSpec spec;
    spec.cost_matrix = cost_ratio_matrix(3.0);
    spec.positive_rates = Vec{0.2, 0.35, 0.45};
    spec.class_spec = {{"kind", "empirical_mean"}, {"sizes", {5, 50}}};
    spec.seed = derive_seed(seed, 21);
    scenarios.push_back(cost_sensitive_scenario(spec));
  }
  {
    AssignmentSpec spec;
    spec.tasks = 3;
    spec.models = 3;
    spec.capacities = {1, 2, 2};
    spec.score_means = {{4.0, 3.0, 2.0}, {3.5, 2.5, 4.5}, {2.0, 4.0, 3.0}};
    spec.mu = Vec{0.5, 0.5};
    spec.class_spec = {{"kind", "empirical_mean"}, {"sizes", {2, 8}}};
    spec.seed = derive_seed(seed, 22);
    scenarios.push_back(assignment_scenario(spec));
  }
  scenarios.push_back(counterexample_scenario(0.698, 2.0, 0.1));
  scenarios.push_back(normalization_example_scenario(0.5));

  Rng rng = make_rng(derive_seed(seed, 23));
  for (const Scenario& scenario : scenarios) {
    for (int k = 0; k < 200; ++k) {
      const int design = random_int(rng, 0, scenario.pool.size() - 1);
      const Vec label = scenario.draw_label(design, rng);
      result.trials += 1;
      if (static_cast<int>(label.size()) != scenario.poly.dimension()) {
        record_failure(result, "label dimension mismatch");
      }
      if (norm(label) > scenario.rho_c + 1e-9) {
        record_failure(result, "label norm above the scenario radius");
      }
    }
  }
  return result;
}

PropertyResult check_cost_sensitive_labels(std::uint64_t seed) {
  PropertyResult result{"scenarios/cost_sensitive_binary_label_set", 0, 0, ""};
  CostSensitiveSpec spec;
  spec.cost_matrix = cost_ratio_matrix(2.0);
  spec.positive_rates = Vec{0.3, 0.6};
  spec.class_spec = {{"kind", "empirical_mean"}, {"sizes", {5, 20}}};
  spec.seed = derive_seed(seed, 24);
  const Scenario scenario = cost_sensitive_scenario(spec);
  const Vec negative{0.0, 1.0};
  const Vec positive{2.0, 0.0};
  Rng rng = make_rng(derive_seed(seed, 25));
  for (int k = 0; k < 500; ++k) {
    const int design = k % 2;
    const Vec label = scenario.draw_label(design, rng);
    result.trials += 1;
    if (label != negative && label != positive) {
      record_failure(result, "label outside the mapped cost rows");
    }
  }
  return result;
}

PropertyResult check_assignment_vertices(std::uint64_t) {
  PropertyResult result{"scenarios/assignment_vertices_feasible_and_counted", 0,
                        0, ""};
  const int tasks = 5;
  const int models = 4;
  const std::vector<int> capacities{1, 2, 2, 2};
  const std::vector<Vec> vertices =
      enumerate_assignment_vertices(tasks, models, capacities, 1, {});
  // Independent oracle: filter all models^tasks assignments directly.
  long long expected = 0;
  std::vector<int> choice(static_cast<std::size_t>(tasks), 0);
  while (true) {
    std::vector<int> used(static_cast<std::size_t>(models), 0);
    for (int t = 0; t < tasks; ++t) used[static_cast<std::size_t>(choice[static_cast<std::size_t>(t)])] += 1;
    bool ok = true;
    for (int mdl = 0; mdl < models; ++mdl) {
      if (used[static_cast<std::size_t>(mdl)] > capacities[static_cast<std::size_t>(mdl)]) ok = false;
    }
    if (ok) ++expected;
    int pos = tasks - 1;
    while (pos >= 0 && choice[static_cast<std::size_t>(pos)] == models - 1) {
      choice[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
    choice[static_cast<std::size_t>(pos)] += 1;
  }
  result.trials += 1;
  if (static_cast<long long>(vertices.size()) != expected) {
    std::ostringstream oss;
    oss << "enumerated " << vertices.size() << " expected " << expected;
    record_failure(result, oss.str());
  }
  for (const Vec& v : vertices) {
    result.trials += 1;
    for (int t = 0; t < tasks; ++t) {
      double row = 0.0;
      for (int mdl = 0; mdl < models; ++mdl) {
        row += v[static_cast<std::size_t>(t * models + mdl)];
      }
      if (row != 1.0) record_failure(result, "task demand violated");
    }
    for (int mdl = 0; mdl < models; ++mdl) {
      double col = 0.0;
      for (int t = 0; t < tasks; ++t) {
        col += v[static_cast<std::size_t>(t * models + mdl)];
      }
      if (col > capacities[static_cast<std::size_t>(mdl)] + 0.5) {
        record_failure(result, "capacity violated");
      }
    }
  }
  // The optional joint cap must only remove vertices.
  const std::vector<Vec> joint = enumerate_assignment_vertices(
      tasks, models, capacities, 1, {JointCapacity{{1, 3}, 2}});
  result.trials += 1;
  if (joint.size() >= vertices.size()) {
    record_failure(result, "joint capacity did not restrict the vertex set");
  }
  for (const Vec& v : joint) {
    double used = 0.0;
    for (int t = 0; t < tasks; ++t) {
      used += v[static_cast<std::size_t>(t * models + 1)] +
              v[static_cast<std::size_t>(t * models + 3)];
    }
    result.trials += 1;
    if (used > 2.5) record_failure(result, "joint capacity violated");
  }
  return result;
}

PropertyResult check_counterexample_identity(std::uint64_t) {
  PropertyResult result{"scenarios/counterexample_population_identity", 0, 0,
                        ""};
  for (double theta : {0.4, 0.698, 1.1}) {
    for (double mean_norm : {1.0, 2.0}) {
      const Scenario scenario = counterexample_scenario(theta, mean_norm, 0.1);
      const Vec& mean = scenario.conditional_means[0];
      const Vec& h1 = scenario.hypotheses.member(0).at(0);
      const Vec& h2 = scenario.hypotheses.member(1).at(0);
      result.trials += 1;
      // The squared-loss population difference collapses to 2 E[c]'(h2-h1).
      if (std::abs(2.0 * dot(mean, sub(h2, h1))) >
          1e-12 * mean_norm * mean_norm) {
        record_failure(result, "population squared-loss difference nonzero");
      }
      if (std::abs(squared_distance(h1, mean) - squared_distance(h2, mean)) >
          1e-12 * mean_norm * mean_norm) {
        record_failure(result, "hypotheses not equidistant from the mean");
      }
      if (linear_oracle(scenario.poly, h1).vertex_index ==
          linear_oracle(scenario.poly, h2).vertex_index) {
        record_failure(result, "hypotheses share a decision");
      }
      if (!(exact_excess_risk(scenario.hypotheses.member(1),
                              scenario.hypotheses.member(0), scenario) > 0.0)) {
        record_failure(result, "suboptimal member has no positive excess");
      }
    }
  }
  return result;
}

PropertyResult check_aggregate_order_invariance(std::uint64_t seed) {
  PropertyResult result{"harness/aggregates_invariant_to_execution_order", 0, 0,
                        ""};
  ExperimentConfig config;
  config.scenario_config = {{"kind", "counterexample"}};
  config.methods = MethodSpec::all();
  config.trials = 6;
  config.horizon = 20;
  config.base_seed = derive_seed(seed, 31);
  const Scenario scenario = scenario_from_json(config.scenario_config);

  config.parallelism = 1;
  const ExperimentResult serial = run_experiment(config, scenario);
  config.parallelism = 4;
  const ExperimentResult parallel = run_experiment(config, scenario);

  const CsvTable a = aggregate_table(serial);
  const CsvTable b = aggregate_table(parallel);
  result.trials += 1;
  if (a.rows != b.rows) {
    record_failure(result, "parallel aggregate differs from serial aggregate");
  }
  const CsvTable ta = trajectory_table(serial, scenario);
  const CsvTable tb = trajectory_table(parallel, scenario);
  result.trials += 1;
  if (ta.rows != tb.rows) {
    record_failure(result, "parallel trajectory differs from serial trajectory");
  }
  return result;
}

PropertyResult check_csv_round_trip(std::uint64_t seed) {
  PropertyResult result{"harness/csv_round_trip_exact", 0, 0, ""};
  Rng rng = make_rng(derive_seed(seed, 32));
  const std::string path =
      (std::filesystem::temp_directory_path() / "iwsd_csv_check.csv").string();
  CsvTable table;
  table.header = {"a", "b", "c"};
  std::vector<std::vector<double>> values;
  for (int r = 0; r < 50; ++r) {
    std::vector<double> row;
    row.push_back(normal_draw(rng) * std::pow(10.0, random_int(rng, -8, 8)));
    row.push_back(-uniform01(rng));
    row.push_back(static_cast<double>(random_int(rng, -5, 5)));
    values.push_back(row);
    table.rows.push_back({format_double(row[0]), format_double(row[1]),
                          format_double(row[2])});
  }
  write_csv(path, table);
  const CsvTable loaded = read_csv(path);
  result.trials += 1;
  if (loaded.header != table.header) record_failure(result, "header mismatch");
  for (std::size_t r = 0; r < values.size(); ++r) {
    result.trials += 1;
    for (std::size_t c = 0; c < 3; ++c) {
      const double parsed = std::strtod(loaded.rows[r][c].c_str(), nullptr);
      if (parsed != values[r][c]) {
        record_failure(result, "value failed to round-trip exactly");
      }
    }
  }
  std::filesystem::remove(path);
  return result;
}

}  // namespace

std::vector<PropertyResult> run_all_checks(std::uint64_t seed) {
  std::vector<PropertyResult> results;
  results.push_back(check_oracle_objective(seed));
  results.push_back(check_perturbation_stability(seed));
  results.push_back(check_degeneracy_brute_force(seed));
  results.push_back(check_scale_invariance_with(
      [](const Polytope& poly, const Vec& cost) {
        return linear_oracle(poly, cost).vertex_index;
      },
      seed, 1000));
  results.push_back(check_spo_bounds(seed));
  results.push_back(check_spo_lipschitz(seed));
  results.push_back(check_unbiasedness(seed));
  results.push_back(check_excess_risk_nonnegative(seed));
  results.push_back(check_gamma_properties(seed));
  results.push_back(check_augmentation(seed));
  results.push_back(check_gap_bound(seed));
  results.push_back(check_directional_metric(seed));
  results.push_back(check_engine_invariants(seed));
  results.push_back(check_uncertainty_monotone(seed));
  results.push_back(check_slackness_schedule(seed));
  results.push_back(check_normalization_example_sampling(seed));
  results.push_back(check_label_radius(seed));
  results.push_back(check_cost_sensitive_labels(seed));
  results.push_back(check_assignment_vertices(seed));
  results.push_back(check_counterexample_identity(seed));
  results.push_back(check_aggregate_order_invariance(seed));
  results.push_back(check_csv_round_trip(seed));
  return results;
}

}  // namespace iwsd
