#include "iwsd/hypotheses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "iwsd/losses.hpp"
#include "iwsd/random.hpp"
#include "iwsd/scenario.hpp"

namespace iwsd {

void DesignPool::validate() const {
  if (design_ids.empty()) throw std::invalid_argument("DesignPool: empty pool");
  if (mu.size() != design_ids.size()) {
    throw std::invalid_argument("DesignPool: mu length mismatch");
  }
  double total = 0.0;
  for (double p : mu) {
    if (!(p >= 0.0)) throw std::invalid_argument("DesignPool: negative mu entry");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("DesignPool: mu must sum to 1");
  }
  std::set<std::string> seen(design_ids.begin(), design_ids.end());
  if (seen.size() != design_ids.size()) {
    throw std::invalid_argument("DesignPool: duplicate design ids");
  }
}

DesignPool make_design_pool(std::vector<std::string> ids, Vec mu) {
  DesignPool pool;
  pool.design_ids = std::move(ids);
  pool.mu = std::move(mu);
  pool.validate();
  return pool;
}

DesignPool uniform_design_pool(int m) {
  std::vector<std::string> ids;
  for (int i = 0; i < m; ++i) ids.push_back("x" + std::to_string(i + 1));
  return make_design_pool(std::move(ids),
                          Vec(static_cast<std::size_t>(m), 1.0 / m));
}

DesignPool DesignPool::from_json(const nlohmann::json& j) {
  return make_design_pool(j.at("ids").get<std::vector<std::string>>(),
                          j.at("mu").get<Vec>());
}

nlohmann::json DesignPool::to_json() const {
  return nlohmann::json{{"ids", design_ids}, {"mu", mu}};
}

void HypothesisClass::validate() const {
  if (members.empty()) {
    throw std::invalid_argument("HypothesisClass: empty class");
  }
  const std::size_t m = members[0].predictions.size();
  if (m == 0) throw std::invalid_argument("HypothesisClass: no designs");
  const std::size_t d = members[0].predictions[0].size();
  std::set<std::string> ids;
  for (const Hypothesis& h : members) {
    if (!ids.insert(h.id).second) {
      throw std::invalid_argument("HypothesisClass: duplicate member id " + h.id);
    }
    if (h.predictions.size() != m) {
      throw std::invalid_argument("HypothesisClass: design count mismatch");
    }
    for (const Vec& row : h.predictions) {
      if (row.size() != d) {
        throw std::invalid_argument("HypothesisClass: prediction dim mismatch");
      }
      if (!all_finite(row)) {
        throw std::invalid_argument("HypothesisClass: non-finite prediction");
      }
      if (!(norm(row) > kNormEpsilon)) {
        throw std::invalid_argument(
            "HypothesisClass: prediction row is not normalizable");
      }
    }
  }
}

HypothesisClass make_hypothesis_class(std::vector<Hypothesis> members) {
  HypothesisClass cls;
  cls.members = std::move(members);
  cls.validate();
  return cls;
}

HypothesisClass HypothesisClass::from_json(const nlohmann::json& j) {
  std::vector<Hypothesis> members;
  for (const auto& mj : j.at("members")) {
    Hypothesis h;
    h.id = mj.at("id").get<std::string>();
    for (const auto& row : mj.at("predictions")) h.predictions.push_back(row.get<Vec>());
    members.push_back(std::move(h));
  }
  HypothesisClass cls = make_hypothesis_class(std::move(members));
  if (j.contains("designs") && j.at("designs").get<int>() != cls.num_designs()) {
    throw std::invalid_argument("HypothesisClass: designs field mismatch");
  }
  if (j.contains("dim") && j.at("dim").get<int>() != cls.dim()) {
    throw std::invalid_argument("HypothesisClass: dim field mismatch");
  }
  return cls;
}

nlohmann::json HypothesisClass::to_json() const {
  nlohmann::json mj = nlohmann::json::array();
  for (const Hypothesis& h : members) {
    mj.push_back({{"id", h.id}, {"predictions", h.predictions}});
  }
  return nlohmann::json{
      {"designs", num_designs()}, {"dim", dim()}, {"members", mj}};
}

double directional_difference(const Hypothesis& a, const Hypothesis& b,
                              int design) {
  return distance(normalized(a.at(design)), normalized(b.at(design)));
}

double gamma_constant(const HypothesisClass& cls, const DesignPool& pool) {
  const int m = pool.size();
  const int n = cls.size();
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    double worst = 0.0;
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        worst = std::max(worst,
                         directional_difference(cls.member(a), cls.member(b), i));
      }
    }
    total += worst;
  }
  return total;
}

double eta_margin(const HypothesisClass& cls, const DesignPool& pool,
                  const Polytope& poly) {
  double worst = std::numeric_limits<double>::infinity();
  for (const Hypothesis& h : cls.members) {
    for (int i = 0; i < pool.size(); ++i) {
      const Vec& pred = h.at(i);
      worst = std::min(worst, distance_to_degeneracy(poly, pred) / norm(pred));
    }
  }
  return worst;
}

namespace {

// Normalized margin of `cost` for vertex `target`: min over the other
// vertices of cost.(v_j - v_target) / |v_j - v_target|. Positive iff the
// vertex is uniquely optimal for `cost`.
double vertex_margin(const Polytope& poly, int target, const Vec& cost) {
  double worst = std::numeric_limits<double>::infinity();
  for (int j = 0; j < poly.num_vertices(); ++j) {
    if (j == target) continue;
    const Vec edge = sub(poly.vertex(j), poly.vertex(target));
    worst = std::min(worst, dot(cost, edge) / norm(edge));
  }
  return worst;
}

}  // namespace

const ConeAnchor* ConeAnchorSet::find(int vertex_index) const {
  for (const ConeAnchor& a : anchors) {
    if (a.vertex_index == vertex_index) return &a;
  }
  return nullptr;
}

double ConeAnchorSet::min_margin() const {
  double worst = std::numeric_limits<double>::infinity();
  for (const ConeAnchor& a : anchors) worst = std::min(worst, a.margin);
  return worst;
}

ConeAnchorSet cone_anchors(const Polytope& poly, std::uint64_t seed) {
  constexpr int kRestarts = 512;
  const int d = poly.dimension();
  const int k = poly.num_vertices();
  ConeAnchorSet out;

  for (int target = 0; target < k; ++target) {
    Rng rng = make_rng(derive_seed(seed, static_cast<std::uint64_t>(target)));
    Vec best(static_cast<std::size_t>(d), 0.0);
    double best_margin = -std::numeric_limits<double>::infinity();

    // Chebyshev-style seed: average of the normalized outgoing edges.
    Vec centroid(static_cast<std::size_t>(d), 0.0);
    for (int j = 0; j < k; ++j) {
      if (j == target) continue;
      const Vec edge = sub(poly.vertex(j), poly.vertex(target));
      const Vec unit = scaled(edge, 1.0 / norm(edge));
      for (int c = 0; c < d; ++c) centroid[static_cast<std::size_t>(c)] += unit[static_cast<std::size_t>(c)];
    }
    if (norm(centroid) > kNormEpsilon) {
      const Vec cand = normalized(centroid);
      best_margin = vertex_margin(poly, target, cand);
      best = cand;
    }

    for (int r = 0; r < kRestarts; ++r) {
      Vec cand(static_cast<std::size_t>(d));
      for (int c = 0; c < d; ++c) cand[static_cast<std::size_t>(c)] = normal_draw(rng);
      const double n = norm(cand);
      if (n <= kNormEpsilon) continue;
      cand = scaled(cand, 1.0 / n);
      const double margin = vertex_margin(poly, target, cand);
      if (margin > best_margin) {
        best_margin = margin;
        best = cand;
      }
    }

    // Coordinate-wise refinement with a shrinking step.
    if (best_margin > -std::numeric_limits<double>::infinity()) {
      for (double step = 0.5; step > 1e-7; step *= 0.5) {
        bool improved = true;
        while (improved) {
          improved = false;
          for (int c = 0; c < d; ++c) {
            for (double sign : {1.0, -1.0}) {
              Vec cand = best;
              cand[static_cast<std::size_t>(c)] += sign * step;
              const double n = norm(cand);
              if (n <= kNormEpsilon) continue;
              cand = scaled(cand, 1.0 / n);
              const double margin = vertex_margin(poly, target, cand);
              if (margin > best_margin) {
                best_margin = margin;
                best = cand;
                improved = true;
              }
            }
          }
        }
      }
    }

    if (best_margin > kTieTolerance &&
        linear_oracle(poly, best).vertex_index == target) {
      out.anchors.push_back(ConeAnchor{target, best, best_margin});
    } else {
      out.skipped_vertices.push_back(target);
    }
  }
  return out;
}

HypothesisClass augment_class(const HypothesisClass& cls, const Polytope& poly,
                              const ConeAnchorSet& anchors, double eta,
                              AugmentLog* log) {
  if (!(eta > 0.0)) throw std::invalid_argument("augment_class: eta must be > 0");
  if (anchors.anchors.empty() || eta > anchors.min_margin() + 1e-15) {
    throw std::invalid_argument(
        "augment_class: eta exceeds the margin of the available anchors");
  }
  AugmentLog local;
  HypothesisClass out = cls;
  for (Hypothesis& h : out.members) {
    for (std::size_t i = 0; i < h.predictions.size(); ++i) {
      Vec& row = h.predictions[i];
      const double nu = distance_to_degeneracy(poly, row);
      if (nu / norm(row) >= eta) continue;
      const int vertex = linear_oracle(poly, row).vertex_index;
      const ConeAnchor* anchor = anchors.find(vertex);
      if (anchor == nullptr) {
        throw std::invalid_argument(
            "augment_class: no anchor covers the cone of vertex " +
            std::to_string(vertex));
      }
      if (nu <= kTieTolerance) local.boundary_rows += 1;
      row = anchor->cost;
      local.rows_replaced += 1;
    }
  }
  if (log != nullptr) *log = local;
  return out;
}

double gap_lower_bound(double mu_lb, double eta, double c_lb, double gamma_lb) {
  if (!(mu_lb > 0.0) || !(eta > 0.0) || !(c_lb > 0.0) || !(gamma_lb > 0.0)) {
    throw std::invalid_argument("gap_lower_bound: all inputs must be positive");
  }
  return mu_lb * eta * c_lb * gamma_lb;
}

std::vector<int> optimal_members(const HypothesisClass& cls,
                                 const Scenario& scenario) {
  if (!scenario.has_conditional_means()) {
    throw std::invalid_argument("optimal_members: conditional means required");
  }
  const int n = cls.size();
  // Risk differences relative to member 0; the absolute risk cancels.
  std::vector<double> rel(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    rel[static_cast<std::size_t>(i)] =
        exact_excess_risk(cls.member(i), cls.member(0), scenario);
  }
  const double best = *std::min_element(rel.begin(), rel.end());
  std::vector<int> out;
  for (int i = 0; i < n; ++i) {
    if (rel[static_cast<std::size_t>(i)] <= best + kCoOptimalTolerance) {
      out.push_back(i);
    }
  }
  return out;
}

double measured_gap(const HypothesisClass& cls, const Scenario& scenario) {
  const std::vector<int> optimal = optimal_members(cls, scenario);
  const Hypothesis& star = cls.member(optimal.front());
  std::vector<bool> is_opt(static_cast<std::size_t>(cls.size()), false);
  for (int i : optimal) is_opt[static_cast<std::size_t>(i)] = true;
  double gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < cls.size(); ++i) {
    if (is_opt[static_cast<std::size_t>(i)]) continue;
    gap = std::min(gap, exact_excess_risk(cls.member(i), star, scenario));
  }
  return gap;
}

double safe_perturbation_bound(const HypothesisClass& cls,
                               const std::vector<int>& optimal,
                               const DesignPool& pool, const Polytope& poly) {
  double bound = 2.0;
  for (int idx : optimal) {
    const Hypothesis& h = cls.member(idx);
    for (int i = 0; i < pool.size(); ++i) {
      bound = std::min(bound, distance_to_degeneracy(poly, normalized(h.at(i))));
    }
  }
  return bound;
}

}  // namespace iwsd
