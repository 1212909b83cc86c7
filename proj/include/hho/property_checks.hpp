// Invariants of the local operators evaluated on random triangles.
#ifndef HHO_PROPERTY_CHECKS_HPP
#define HHO_PROPERTY_CHECKS_HPP

#include <random>
#include <string>
#include <vector>

#include "hho/mesh.hpp"

namespace hho {

struct CheckResult {
  std::string name;
  double value = 0.0;     ///< worst observed defect
  double tolerance = 0.0; ///< passes when value <= tolerance
  bool passed() const { return value <= tolerance; }
};

struct PropertyCheckOptions {
  int k_min = 0;
  int k_max = 4;
  int triangles = 5;
  unsigned seed = 20240607u;
};

/// Single-element mesh on a random triangle with vertices in the unit square and
/// regularity ratio at most `max_ratio`.
Mesh random_triangle(std::mt19937 &rng, double max_ratio = 12.0);

std::vector<CheckResult> run_property_checks(const PropertyCheckOptions &options = {});

} // namespace hho

#endif
