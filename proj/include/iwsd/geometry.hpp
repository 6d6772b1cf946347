#ifndef IWSD_GEOMETRY_HPP_
#define IWSD_GEOMETRY_HPP_

#include <string>
#include <vector>

#include "iwsd/linalg.hpp"
#include "json.hpp"

namespace iwsd {

// Absolute tolerance on objective values when detecting ties in the
// downstream oracle. Ties break to the lowest vertex index.
inline constexpr double kTieTolerance = 1e-9;

// Predictions below this norm cannot be normalized and are rejected.
inline constexpr double kNormEpsilon = 1e-12;

// Bounded polyhedral feasible region stored as its vertex list.
class Polytope {
 public:
  // Args:
  //   dimension: ambient decision-space dimension.
  //   vertices: at least two pairwise-distinct finite points in R^dimension.
  Polytope(int dimension, std::vector<Vec> vertices);

  int dimension() const { return dim_; }
  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  const Vec& vertex(int i) const { return vertices_[static_cast<std::size_t>(i)]; }
  const std::vector<Vec>& vertices() const { return vertices_; }

  // Schema: {"dimension": int, "vertices": [[float,...],...]}
  static Polytope from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

 private:
  int dim_;
  std::vector<Vec> vertices_;
};

struct OracleResult {
  int vertex_index;
  Vec decision;
  double objective;
};

// Minimizes cost . w over the vertex list. Values within kTieTolerance of
// the minimum count as tied; the lowest tied index is returned, so repeated
// calls with the same input are identical.
OracleResult linear_oracle(const Polytope& poly, const Vec& cost);

// Maximum pairwise vertex distance.
double diameter(const Polytope& poly);

// Minimum pairwise vertex distance; strictly positive by construction.
double min_vertex_gap(const Polytope& poly);

// Smallest perturbation of `cost` that makes the downstream problem have
// multiple optimal solutions: min over non-optimal vertices v of
// cost.(v - v*) / |v - v*|. Returns 0 exactly when the oracle already sees
// a tie.
double distance_to_degeneracy(const Polytope& poly, const Vec& cost);

// cost / |cost|; throws when |cost| <= kNormEpsilon.
Vec normalized(const Vec& cost);

}  // namespace iwsd

#endif  // IWSD_GEOMETRY_HPP_
