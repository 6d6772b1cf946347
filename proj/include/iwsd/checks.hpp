#ifndef IWSD_CHECKS_HPP_
#define IWSD_CHECKS_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "iwsd/scenario.hpp"

namespace iwsd {

struct PropertyResult {
  std::string name;
  long long trials = 0;
  long long failures = 0;
  std::string detail;  // first failure, for the report

  bool ok() const { return failures == 0; }
};

// Seeded random instances shared by the property suite and the tests.
Polytope random_polytope(Rng& rng, int dim_lo, int dim_hi, int verts_lo,
                         int verts_hi);
Vec random_unit(Rng& rng, int d);
Vec random_nonzero(Rng& rng, int d, double scale);

// Finite-support instance with a random pool, atoms, and class.
Scenario random_finite_scenario(Rng& rng);

// Scenario family passing all three optimality-gap conditions, half built
// from rotated single-design counterexamples and half from mirrored
// cost-sensitive instances.
std::vector<Scenario> gap_condition_scenarios(int count, std::uint64_t seed);

// Reference oracle for the distance to degeneracy: minimum over vertex-pair
// tie hyperplanes of the projection distance, keeping only projections at
// which the pair is co-optimal.
double brute_force_distance_to_degeneracy(const Polytope& poly, const Vec& cost);

// Scale-invariance property with a pluggable oracle, so a deliberately
// broken tie-break can be shown to trip the check.
PropertyResult check_scale_invariance_with(
    const std::function<int(const Polytope&, const Vec&)>& oracle_vertex,
    std::uint64_t seed, int instances);

std::vector<PropertyResult> run_all_checks(std::uint64_t seed);

}  // namespace iwsd

#endif  // IWSD_CHECKS_HPP_
