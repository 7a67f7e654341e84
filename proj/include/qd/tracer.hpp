#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qd/qdiff.hpp"

namespace qd {

struct Window {
  double x0 = -1, y0 = -1, x1 = 1, y1 = 1;

  bool contains(Complex z) const noexcept {
    return z.real() >= x0 && z.real() <= x1 && z.imag() >= y0 && z.imag() <= y1;
  }
  Complex center() const noexcept { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
  double width() const noexcept { return x1 - x0; }
  double height() const noexcept { return y1 - y0; }
  double diagonal() const noexcept;
  /// Same center, sides multiplied by factor.
  Window inflated(double factor) const noexcept;
  bool valid() const noexcept { return x1 > x0 && y1 > y0; }
};

/// Length scale of a differential: diameter of its finite critical set, floored at 1.
double length_scale(const QuadraticDifferential& qd);

/// Bounding box of the finite critical points inflated 4x about its center,
/// squared up and never smaller than [-2, 2]^2 around that center.
Window default_window(const QuadraticDifferential& qd);

struct TraceOptions {
  double max_phi_length = 100.0;
  Window window;
  double snap_radius = 1e-6;
  double rk_tol = 1e-10;
  long max_steps = 1'000'000;
  /// Largest phi-length per step; 0 leaves steps to the error control.
  double max_step = 0.0;

  /// Defaults derived from the differential: budget 100 * diam (floor 10),
  /// default_window, snap radius 1e-6 * diam. QD_MAX_STEPS overrides max_steps.
  static TraceOptions defaults_for(const QuadraticDifferential& qd);
  /// Throws InvalidArgument unless all fields are positive and the window nonempty.
  void validate() const;
};

enum class Termination { Closed, HitCritical, EscapedWindow, PhiLengthBudget, StepBudget };
const char* to_string(Termination t) noexcept;

struct TrajectoryRay {
  std::vector<Complex> points;
  /// Natural parameter at each point (phi-length travelled so far).
  std::vector<double> taus;
  /// Continued sqrt(phi) (z coordinates) at each point; the stored branch states.
  std::vector<Complex> sqrt_values;
  /// 1 where the point was integrated in the chart at infinity.
  std::vector<std::uint8_t> in_infinity_chart;

  double phi_length = 0.0;
  double imag_drift = 0.0;
  Termination termination = Termination::StepBudget;
  std::optional<std::size_t> hit_point;  // critical point id for HitCritical
  double incoming_angle = 0.0;           // arg of the arrival direction into hit_point
  Complex direction_seed{1.0, 0.0};      // unit tangent at the start
  int orientation = 1;
  bool vertical = false;
  std::optional<std::size_t> source_point;
  /// Center of the chart at infinity used while tracing.
  Complex chart_center{};
  std::vector<std::string> diagnostics;
};

/// Integrates dz/dtau = orientation / sqrt(phi) in the natural parameter with
/// an embedded Dormand-Prince 5(4) pair. Throws StartTooClose when z0 lies in
/// the snap disk of a critical point.
TrajectoryRay trace_horizontal(const QuadraticDifferential& qd, Complex z0, int orientation,
                               const TraceOptions& opts);

/// Horizontal tracing of -phi.
TrajectoryRay trace_vertical(const QuadraticDifferential& qd, Complex z0, int orientation,
                             const TraceOptions& opts);

/// Ray leaving finite critical point `cp_index` along its direction_index-th
/// critical direction. The returned polyline starts at the critical point.
TrajectoryRay trace_from_critical(const QuadraticDifferential& qd, std::size_t cp_index, int direction_index,
                                  const TraceOptions& opts);

/// Composite 8-node Gauss-Legendre quadrature of sqrt|phi| |dz| along the polyline.
double phi_length_of(const QuadraticDifferential& qd, std::span<const Complex> polyline);
/// Chart-aware variant for traced rays (segments near infinity are measured in the u chart).
double phi_length_of(const QuadraticDifferential& qd, const TrajectoryRay& ray);

/// max over vertices of |Im sum_k int_{chord k} sqrt(phi) dz|, recomputed from
/// the stored branch values.
double imag_drift_of(const QuadraticDifferential& qd, const TrajectoryRay& ray);

/// Allowed drift for a ray of the given phi-length: 1e-5 per 100 units, floor 1e-5.
double drift_allowance(double phi_length) noexcept;

}  // namespace qd
