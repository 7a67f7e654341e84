#pragma once

#include <cstdint>
#include <vector>

#include "qd/tracer.hpp"

namespace qd {

struct LemniscatePoint {
  Complex at;
  int order = 0;          // order as a zero of -(r'/r)^2
  double level = 0.0;     // |r| there
  double matched_distance = 0.0;  // distance to the zero of sum m_a/(z-a)
};

struct LemniscatePole {
  SpherePoint at = SpherePoint::infinity();
  Complex quadratic_residue;
  bool negative = false;  // Re < 0 and |Im| <= 1e-8 |residue|
};

struct StrebelSample {
  Complex point;
  bool closed = false;
  Termination termination = Termination::StepBudget;
  double phi_length = 0.0;
};

struct LemniscateReport {
  std::vector<LemniscatePoint> finite_critical_points;
  std::vector<LemniscatePole> double_poles;
  std::vector<double> critical_levels;
  std::vector<StrebelSample> strebel_samples;
  /// Every zero of phi matches a zero of sum m_a/(z-a) with twice its multiplicity.
  bool critical_points_consistent = false;
  bool all_residues_negative = false;
  std::vector<std::string> diagnostics;
};

/// Lemniscate differential of r = p/q with structural checks and `samples`
/// Strebel traces from uniformly drawn regular points (std::mt19937_64 seeded with `seed`).
LemniscateReport analyze_lemniscate(const Polynomial& p, const Polynomial& q, int samples,
                                    std::uint64_t seed = 1);

struct LevelCurve {
  std::vector<std::vector<Complex>> polylines;
  /// Largest distance from a traced trajectory point to the extracted curve.
  double max_deviation = 0.0;
  int traced_checks = 0;
};

/// Marching squares on |p|^2 - c^2 |q|^2 over an n x n grid, vertices projected
/// onto |r| = c by Newton steps, then cross-checked against five traced
/// trajectories of the lemniscate differential. Throws EmptyLevel when the
/// curve misses the window.
LevelCurve lemniscate_level_curve(const Polynomial& p, const Polynomial& q, double c, const Window& window, int n);

}  // namespace qd
