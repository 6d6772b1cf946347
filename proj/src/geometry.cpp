#include "iwsd/geometry.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace iwsd {

Polytope::Polytope(int dimension, std::vector<Vec> vertices)
    : dim_(dimension), vertices_(std::move(vertices)) {
  if (dim_ < 1) throw std::invalid_argument("Polytope: dimension must be >= 1");
  if (vertices_.size() < 2) {
    throw std::invalid_argument("Polytope: need at least 2 vertices");
  }
  for (const Vec& v : vertices_) {
    if (static_cast<int>(v.size()) != dim_) {
      throw std::invalid_argument("Polytope: vertex dimension mismatch");
    }
    if (!all_finite(v)) {
      throw std::invalid_argument("Polytope: non-finite vertex coordinate");
    }
  }
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    for (std::size_t j = i + 1; j < vertices_.size(); ++j) {
      if (squared_distance(vertices_[i], vertices_[j]) <= 0.0) {
        throw std::invalid_argument("Polytope: duplicate vertices");
      }
    }
  }
}

Polytope Polytope::from_json(const nlohmann::json& j) {
  const int dim = j.at("dimension").get<int>();
  std::vector<Vec> verts;
  for (const auto& row : j.at("vertices")) {
    verts.push_back(row.get<Vec>());
  }
  return Polytope(dim, std::move(verts));
}

nlohmann::json Polytope::to_json() const {
  return nlohmann::json{{"dimension", dim_}, {"vertices", vertices_}};
}

OracleResult linear_oracle(const Polytope& poly, const Vec& cost) {
  if (static_cast<int>(cost.size()) != poly.dimension()) {
    throw std::invalid_argument("linear_oracle: cost dimension mismatch");
  }
  if (!all_finite(cost)) {
    throw std::invalid_argument("linear_oracle: non-finite cost");
  }
  const int k = poly.num_vertices();
  std::vector<double> objectives(static_cast<std::size_t>(k));
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < k; ++i) {
    objectives[static_cast<std::size_t>(i)] = dot(cost, poly.vertex(i));
    best = std::min(best, objectives[static_cast<std::size_t>(i)]);
  }
  for (int i = 0; i < k; ++i) {
    if (objectives[static_cast<std::size_t>(i)] <= best + kTieTolerance) {
      return OracleResult{i, poly.vertex(i), objectives[static_cast<std::size_t>(i)]};
    }
  }
  throw std::logic_error("linear_oracle: unreachable");
}

double diameter(const Polytope& poly) {
  const int k = poly.num_vertices();
  double best = 0.0;
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      best = std::max(best, squared_distance(poly.vertex(i), poly.vertex(j)));
    }
  }
  return std::sqrt(best);
}

double min_vertex_gap(const Polytope& poly) {
  const int k = poly.num_vertices();
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      best = std::min(best, squared_distance(poly.vertex(i), poly.vertex(j)));
    }
  }
  return std::sqrt(best);
}

double distance_to_degeneracy(const Polytope& poly, const Vec& cost) {
  const OracleResult opt = linear_oracle(poly, cost);
  const int k = poly.num_vertices();
  double best = std::numeric_limits<double>::infinity();
  bool tie = false;
  for (int j = 0; j < k; ++j) {
    if (j == opt.vertex_index) continue;
    const Vec edge = sub(poly.vertex(j), opt.decision);
    const double gap = dot(cost, edge);
    if (gap <= kTieTolerance) tie = true;
    best = std::min(best, gap / norm(edge));
  }
  if (tie) return 0.0;
  return best;
}

Vec normalized(const Vec& cost) {
  const double n = norm(cost);
  if (!(n > kNormEpsilon)) {
    throw std::invalid_argument("normalized: vector norm below tolerance");
  }
  return scaled(cost, 1.0 / n);
}

}  // namespace iwsd
