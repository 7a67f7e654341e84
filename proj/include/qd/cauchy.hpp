#pragma once

#include <string>
#include <vector>

#include "qd/graph.hpp"

namespace qd {

/// One short trajectory of -(q^2 - 4pr)/p^2 carrying part of the measure.
struct CauchyComponent {
  std::size_t from_node = 0, to_node = 0;
  std::vector<Complex> polyline;
  Complex mass{};
  /// Density real and nonnegative along the whole polyline (1e-8 relative).
  bool nonnegative = false;
  std::string note;
};

struct CauchyReport {
  std::vector<CauchyComponent> components;
  Complex total_mass{};
  std::size_t unresolved_rays = 0;
};

/// Support and masses of the measure whose Cauchy transform solves
/// p C^2 + q C + r = 0. Throws NoShortTrajectory when the graph has no short edge.
CauchyReport analyze_cauchy(const Polynomial& p, const Polynomial& q, const Polynomial& r);

}  // namespace qd
