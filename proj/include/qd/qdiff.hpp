#pragma once

#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "qd/polyalg.hpp"

namespace qd {

class SpherePoint {
 public:
  static SpherePoint finite(Complex z) { return SpherePoint(false, z); }
  static SpherePoint infinity() { return SpherePoint(true, {}); }

  bool is_infinity() const noexcept { return inf_; }
  /// Finite coordinate; throws Error{InvalidArgument} at infinity.
  Complex value() const;

  friend bool operator==(const SpherePoint&, const SpherePoint&) = default;

 private:
  SpherePoint(bool inf, Complex z) : inf_(inf), z_(z) {}
  bool inf_;
  Complex z_;
};

enum class CriticalKind { FiniteCritical, InfiniteCritical };

/// Zero (signed_order > 0) or pole (signed_order < 0) of phi on the sphere.
/// Zeros and simple poles are finite critical points; poles of order two or
/// more are infinite critical points.
struct CriticalPoint {
  SpherePoint at = SpherePoint::infinity();
  int signed_order = 0;
  CriticalKind kind = CriticalKind::FiniteCritical;
  /// Coefficient of (z-b)^-2 for double poles; empty otherwise.
  std::optional<Complex> quadratic_residue;
  /// Cluster uncertainty from the root finder.
  double radius = 0.0;

  bool is_pole() const noexcept { return signed_order < 0; }
  bool is_zero() const noexcept { return signed_order > 0; }
  bool is_finite_critical() const noexcept { return kind == CriticalKind::FiniteCritical; }
};

enum class DoublePoleKind { Radial, Circular, Spiral };
const char* to_string(DoublePoleKind k) noexcept;

struct NoProvenance {};
/// phi = sign * p / q^2
struct POverQSquared {
  Polynomial p, q;
  int sign = 1;
};
/// phi = -(r'/r)^2 with r = p / q
struct LemniscateForm {
  Polynomial p, q;
};
/// phi = -(q^2 - 4 p r) / p^2 for p C^2 + q C + r = 0
struct CauchyForm {
  Polynomial p, q, r;
};
using Provenance = std::variant<NoProvenance, POverQSquared, LemniscateForm, CauchyForm>;

/// psi(u) = phi(center + 1/u) / u^4 = num(u) / den(u), the coordinate chart at infinity.
struct InfinityChart {
  Complex center;
  Polynomial num, den;
};

/// phi(z) dz^2 with phi = P/Q in lowest terms. Immutable; the critical-point
/// inventory is computed once at construction.
class QuadraticDifferential {
 public:
  const Polynomial& numerator() const noexcept { return num_; }
  const Polynomial& denominator() const noexcept { return den_; }
  const Provenance& provenance() const noexcept { return prov_; }
  const std::vector<CriticalPoint>& critical_points() const noexcept { return crit_; }

  Complex operator()(Complex z) const { return num_(z) / den_(z); }

  /// d = deg P - deg Q
  int degree_difference() const noexcept { return num_.degree() - den_.degree(); }
  /// Signed order at infinity, -(d + 4); zero means infinity is regular.
  int order_at_infinity() const noexcept { return -(degree_difference() + 4); }
  std::optional<std::size_t> infinity_index() const noexcept;

  /// Distance to the nearest other finite critical point (1 when alone).
  double local_scale(std::size_t idx) const;
  /// 1e-3 * local_scale.
  double guard_radius(std::size_t idx) const { return 1e-3 * local_scale(idx); }
  /// Diameter of the set of finite critical locations (zeros and poles at finite points).
  double finite_critical_diameter() const noexcept;

  /// The differential -phi (vertical trajectories of phi are horizontal ones of -phi).
  QuadraticDifferential negated() const;
  /// c * phi for a nonzero complex c.
  QuadraticDifferential scaled(Complex c) const;

  InfinityChart infinity_chart(Complex center) const;

 private:
  friend QuadraticDifferential make_differential(Polynomial num, Polynomial den, Provenance prov);
  QuadraticDifferential() = default;

  Polynomial num_, den_;
  Provenance prov_;
  std::vector<CriticalPoint> crit_;
};

/// Builds P/Q with common root clusters cancelled. Throws ZeroPolynomial for
/// Q = 0, InvalidArgument for P = 0, NotCoprime when root clusters of P and Q
/// are too close to be distinct yet too far apart to cancel.
QuadraticDifferential qd_new(const Polynomial& num, const Polynomial& den);

/// Internal constructor used by the special-form builders: no cancellation.
QuadraticDifferential make_differential(Polynomial num, Polynomial den, Provenance prov);

std::vector<CriticalPoint> critical_points(const QuadraticDifferential& qd);

DoublePoleKind classify_double_pole(const QuadraticDifferential& qd, const SpherePoint& b);

/// The n + 2 directions along which horizontal trajectories leave a finite
/// critical point of order n, angles (2 pi k - arg a) / (n + 2), k = 0..n+1.
std::vector<Complex> critical_directions(const QuadraticDifferential& qd, const CriticalPoint& cp);

/// Leading coefficient a of phi(z) = a (z - z0)^n (1 + O(z - z0)).
Complex local_leading_coefficient(const QuadraticDifferential& qd, const CriticalPoint& cp);

struct BranchState {
  Complex last_point{};
  Complex last_sqrt{};
  bool seeded = false;
};

/// Square root of phi(z) continued from state.last_sqrt (principal root on
/// the first call). Throws GuardViolation inside a guard disk.
std::pair<Complex, BranchState> sqrt_phi_step(const QuadraticDifferential& qd, Complex z,
                                              const BranchState& state);

/// The sign of +-sqrt(value) closest to reference.
Complex continue_sqrt(Complex value, Complex reference) noexcept;

/// The p/q^2 form of phi: the stored one, or p = P with q^2 = Q when every
/// pole has even order. Empty otherwise.
std::optional<POverQSquared> p_over_q_squared_form(const QuadraticDifferential& qd);

QuadraticDifferential qd_from_p_over_q_squared(const Polynomial& p, const Polynomial& q, int sign = 1);
QuadraticDifferential lemniscate_qd(const Polynomial& p, const Polynomial& q);
QuadraticDifferential cauchy_qd(const Polynomial& p, const Polynomial& q, const Polynomial& r);

/// Density of d mu = (1/2 pi i) sqrt(q^2 - 4 p r) / p dz with respect to arc
/// length, at each vertex of an oriented polyline lying on a short trajectory.
/// The global sign makes the midpoint density real and nonnegative.
std::vector<Complex> measure_density(const QuadraticDifferential& qd, std::span<const Complex> polyline);

/// Density at a point z of (or next to) the polyline, with the sign convention of measure_density.
Complex measure_density_at(const QuadraticDifferential& qd, std::span<const Complex> polyline, Complex z);

/// Total mass of the measure along the polyline (Gauss-Legendre per chord,
/// endpoint square-root singularities removed by substitution).
Complex measure_mass(const QuadraticDifferential& qd, std::span<const Complex> polyline);

}  // namespace qd
