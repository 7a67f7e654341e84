#pragma once

#include <optional>
#include <vector>

#include "qd/graph.hpp"

namespace qd {

struct LevelSample {
  double value = 0.0;
  /// Value along the second, homotopically different route.
  double second_value = 0.0;
  double gap = 0.0;
};

/// Im f(z), f(z) = int_{a1}^z sqrt(p)/q dz, for phi = p/q^2. Paths are straight
/// lines with arc detours around poles and zeros; crossing a short-trajectory
/// cut reflects the running value about the cut's level.
class LevelFunction {
 public:
  /// Throws WrongProvenance unless phi has a p/q^2 form. An incomplete pairing
  /// is accepted; its matched pairs still provide cuts.
  LevelFunction(const QuadraticDifferential& qd, const CriticalGraph& graph, const PairingResult& pairing);

  /// Throws PoleOnPath inside a pole guard disk, PathBlocked when routing fails
  /// and ResidueObstructionError when the two routes disagree beyond
  /// 1e-6 * (1 + |value|).
  LevelSample evaluate(Complex z) const;
  double operator()(Complex z) const { return evaluate(z).value; }
  /// Single route through a waypoint, no second-path check.
  double evaluate_via(Complex z, Complex waypoint) const;
  /// Both routes without the obstruction check.
  LevelSample evaluate_unchecked(Complex z) const;

  Complex base_point() const noexcept { return base_; }
  const std::vector<std::vector<Complex>>& cuts() const noexcept { return cuts_; }
  /// |sqrt(p)/q|
  double density(Complex z) const;
  /// True when z lies in a pole's masked neighborhood.
  bool masked(Complex z) const;

  struct Obstacle {
    Complex c;
    double r;
    bool pole;
  };

 private:
  std::vector<Complex> route(Complex a, Complex b, bool flip_poles) const;
  double integrate(const std::vector<Complex>& path) const;

  Polynomial p_, q_;
  std::vector<Obstacle> obstacles_;
  std::vector<Complex> singular_;  // zeros of p and q
  std::vector<std::vector<Complex>> cuts_;
  Complex base_{};
  Complex start_{};       // end of the reference spur
  Complex start_sqrt_{};  // sqrt(p) at start_
  Complex start_integral_{};
  double scale_ = 1.0;
};

/// Builds the graph and pairing with default options.
LevelFunction make_level_function(const QuadraticDifferential& qd);
double level_function(const QuadraticDifferential& qd, const PairingResult& pairing, Complex z);

struct LevelField {
  Complex base_point{};
  std::vector<std::vector<Complex>> cuts;
  Window window;
  int n = 0;
  /// Row-major, row j at y = y0 + j * dy.
  std::vector<double> values;
  std::vector<std::uint8_t> mask;
  double max_gap = 0.0;

  Complex sample_point(int i, int j) const;
  double at(int i, int j) const { return values[static_cast<std::size_t>(j) * n + i]; }
  bool masked(int i, int j) const { return mask[static_cast<std::size_t>(j) * n + i] != 0; }
};

/// N x N samples of the level function; masked near poles (NaN there).
LevelField level_grid(const LevelFunction& lf, const Window& window, int n);

struct VerificationReport {
  bool constant_on_rays = false;  // (ii)
  std::vector<double> ray_spread;  // std / (1 + |mean|) per ray
  std::vector<std::size_t> ray_samples;
  bool nonconstant = false;  // (iii)
  std::size_t constancy_alarms = 0;
  bool continuous = false;  // (i)
  std::size_t jump_violations = 0;
};

/// Up to `count` horizontal rays from regular points of the window, retraced
/// with a step cap when needed so each has at least 120 vertices.
std::vector<TrajectoryRay> verification_rays(const QuadraticDifferential& qd, const LevelFunction& lf,
                                             const Window& window, int count = 3);

/// Marching-squares segments of field = value; cells touching a masked sample are skipped.
std::vector<std::vector<Complex>> contour_segments(const LevelField& field, double value);

VerificationReport verify_level(const LevelField& field, const std::vector<TrajectoryRay>& rays,
                                const LevelFunction& lf, double ray_tolerance = 1e-5);

}  // namespace qd
