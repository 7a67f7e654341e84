#include "qd/qdiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qd/error.hpp"
#include "qd/quadrature.hpp"

namespace qd {

namespace {

constexpr double kPi = std::numbers::pi;

CriticalKind kind_for(int order) {
  return (order >= -1) ? CriticalKind::FiniteCritical : CriticalKind::InfiniteCritical;
}

std::vector<CriticalPoint> build_inventory(const Polynomial& num, const Polynomial& den) {
  std::vector<CriticalPoint> zeros, poles;
  if (num.degree() >= 1) {
    for (const RootCluster& rc : poly_roots(num)) {
      zeros.push_back({SpherePoint::finite(rc.location), rc.multiplicity, CriticalKind::FiniteCritical,
                       std::nullopt, rc.radius});
    }
  }
  if (den.degree() >= 1) {
    for (const RootCluster& rc : poly_roots(den)) {
      CriticalPoint cp{SpherePoint::finite(rc.location), -rc.multiplicity, kind_for(-rc.multiplicity),
                       std::nullopt, rc.radius};
      if (rc.multiplicity == 2) {
        const Polynomial reduced = deflate(den, rc.location, 2);
        cp.quadratic_residue = num(rc.location) / reduced(rc.location);
      }
      poles.push_back(cp);
    }
  }
  std::vector<CriticalPoint> out = std::move(zeros);
  out.insert(out.end(), poles.begin(), poles.end());
  const int d = num.degree() - den.degree();
  const int inf_order = -(d + 4);
  if (inf_order != 0) {
    CriticalPoint cp{SpherePoint::infinity(), inf_order, kind_for(inf_order), std::nullopt, 0.0};
    if (inf_order == -2) cp.quadratic_residue = num.leading() / den.leading();
    out.push_back(cp);
  }
  return out;
}

}  // namespace

Complex SpherePoint::value() const {
  if (inf_) throw Error(Errc::InvalidArgument, "the point at infinity has no finite coordinate");
  return z_;
}

const char* to_string(DoublePoleKind k) noexcept {
  switch (k) {
    case DoublePoleKind::Radial: return "Radial";
    case DoublePoleKind::Circular: return "Circular";
    case DoublePoleKind::Spiral: return "Spiral";
  }
  return "?";
}

std::optional<std::size_t> QuadraticDifferential::infinity_index() const noexcept {
  for (std::size_t i = 0; i < crit_.size(); ++i)
    if (crit_[i].at.is_infinity()) return i;
  return std::nullopt;
}

double QuadraticDifferential::local_scale(std::size_t idx) const {
  const CriticalPoint& cp = crit_.at(idx);
  if (cp.at.is_infinity()) return 1.0;
  const Complex z = cp.at.value();
  double best = -1.0;
  for (std::size_t j = 0; j < crit_.size(); ++j) {
    if (j == idx || crit_[j].at.is_infinity()) continue;
    const double d = std::abs(crit_[j].at.value() - z);
    if (best < 0 || d < best) best = d;
  }
  return best > 0 ? best : 1.0;
}

double QuadraticDifferential::finite_critical_diameter() const noexcept {
  double diam = 0.0;
  for (std::size_t i = 0; i < crit_.size(); ++i) {
    if (crit_[i].at.is_infinity()) continue;
    for (std::size_t j = i + 1; j < crit_.size(); ++j) {
      if (crit_[j].at.is_infinity()) continue;
      diam = std::max(diam, std::abs(crit_[i].at.value() - crit_[j].at.value()));
    }
  }
  return diam;
}

QuadraticDifferential QuadraticDifferential::negated() const { return scaled(-1.0); }

QuadraticDifferential QuadraticDifferential::scaled(Complex c) const {
  if (c == Complex{}) throw Error(Errc::InvalidArgument, "scale factor must be nonzero");
  QuadraticDifferential out = *this;
  out.num_ = c * num_;
  out.prov_ = NoProvenance{};
  for (CriticalPoint& cp : out.crit_)
    if (cp.quadratic_residue) *cp.quadratic_residue *= c;
  return out;
}

InfinityChart QuadraticDifferential::infinity_chart(Complex center) const {
  // phi(c + 1/u) = u^{-n} Pr(u) / (u^{-m} Qr(u)), psi = u^{m - n - 4} Pr / Qr.
  const Polynomial pr = num_.taylor_shift(center).reversed();
  const Polynomial qr = den_.taylor_shift(center).reversed();
  const int k = den_.degree() - num_.degree() - 4;
  std::vector<Complex> mono(static_cast<std::size_t>(std::abs(k)) + 1);
  mono.back() = 1.0;
  const Polynomial uk(std::move(mono));
  if (k >= 0) return {center, uk * pr, qr};
  return {center, pr, uk * qr};
}

QuadraticDifferential make_differential(Polynomial num, Polynomial den, Provenance prov) {
  if (den.is_zero()) throw Error(Errc::ZeroPolynomial, "denominator is the zero polynomial");
  if (num.is_zero()) throw Error(Errc::InvalidArgument, "numerator is the zero polynomial");
  const Complex lead = den.leading();
  QuadraticDifferential qd;
  qd.num_ = (1.0 / lead) * num;
  qd.den_ = (1.0 / lead) * den;
  qd.prov_ = std::move(prov);
  qd.crit_ = build_inventory(qd.num_, qd.den_);
  return qd;
}

QuadraticDifferential qd_new(const Polynomial& num, const Polynomial& den) {
  if (den.is_zero()) throw Error(Errc::ZeroPolynomial, "denominator is the zero polynomial");
  if (num.is_zero()) throw Error(Errc::InvalidArgument, "numerator is the zero polynomial");
  Polynomial p = num, q = den;
  if (p.degree() >= 1 && q.degree() >= 1) {
    const auto rp = poly_roots(p);
    const auto rq = poly_roots(q);
    const double tol = std::max(cluster_tolerance(rp), cluster_tolerance(rq));
    for (const RootCluster& a : rp) {
      for (const RootCluster& b : rq) {
        const double dist = std::abs(a.location - b.location);
        if (dist <= tol + a.radius + b.radius) {
          const int k = std::min(a.multiplicity, b.multiplicity);
          const Complex c = 0.5 * (a.location + b.location);
          p = deflate(p, c, k);
          q = deflate(q, c, k);
        } else if (dist <= 1e2 * tol) {
          throw Error(Errc::NotCoprime, "numerator and denominator roots partially overlap");
        }
      }
    }
  }
  return make_differential(std::move(p), std::move(q), NoProvenance{});
}

std::vector<CriticalPoint> critical_points(const QuadraticDifferential& qd) { return qd.critical_points(); }

DoublePoleKind classify_double_pole(const QuadraticDifferential& qd, const SpherePoint& b) {
  for (const CriticalPoint& cp : qd.critical_points()) {
    if (!(cp.at == b)) {
      if (b.is_infinity() || cp.at.is_infinity()) continue;
      if (std::abs(cp.at.value() - b.value()) > 1e-8 * std::max(1.0, std::abs(b.value())) + cp.radius)
        continue;
    }
    if (cp.signed_order != -2 || !cp.quadratic_residue) {
      throw Error(Errc::WrongOrder, "point is not a pole of order exactly 2");
    }
    const double ang = std::arg(*cp.quadratic_residue);
    constexpr double kAngTol = 1e-9;
    if (std::abs(std::abs(ang) - kPi) <= kAngTol) return DoublePoleKind::Circular;
    if (std::abs(ang) <= kAngTol) return DoublePoleKind::Radial;
    return DoublePoleKind::Spiral;
  }
  throw Error(Errc::WrongOrder, "point is not a critical point");
}

Complex local_leading_coefficient(const QuadraticDifferential& qd, const CriticalPoint& cp) {
  if (cp.at.is_infinity() || !cp.is_finite_critical()) {
    throw Error(Errc::NotFiniteCritical, "critical directions need a finite critical point at a finite location");
  }
  const Complex z0 = cp.at.value();
  const int n = cp.signed_order;
  if (n > 0) {
    return rational_taylor_coeff(qd.numerator(), Polynomial::constant(1.0), z0, n) / qd.denominator()(z0);
  }
  // simple pole
  return qd.numerator()(z0) / qd.denominator().derivative()(z0);
}

std::vector<Complex> critical_directions(const QuadraticDifferential& qd, const CriticalPoint& cp) {
  const Complex a = local_leading_coefficient(qd, cp);
  const int k = cp.signed_order + 2;
  std::vector<Complex> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    double th = (2.0 * kPi * j - std::arg(a)) / k;
    th = std::fmod(th, 2.0 * kPi);
    if (th < 0) th += 2.0 * kPi;
    out.push_back(std::polar(1.0, th));
  }
  return out;
}

Complex continue_sqrt(Complex value, Complex reference) noexcept {
  const Complex s = std::sqrt(value);
  return (std::norm(s - reference) <= std::norm(s + reference)) ? s : -s;
}

std::pair<Complex, BranchState> sqrt_phi_step(const QuadraticDifferential& qd, Complex z,
                                              const BranchState& state) {
  const auto& crit = qd.critical_points();
  for (std::size_t i = 0; i < crit.size(); ++i) {
    if (crit[i].at.is_infinity()) continue;
    if (std::abs(z - crit[i].at.value()) <= qd.guard_radius(i)) {
      throw Error(Errc::GuardViolation, "point lies inside the guard disk of a critical point");
    }
  }
  const Complex v = qd(z);
  const Complex w = state.seeded ? continue_sqrt(v, state.last_sqrt) : std::sqrt(v);
  return {w, BranchState{z, w, true}};
}

std::optional<POverQSquared> p_over_q_squared_form(const QuadraticDifferential& qd) {
  if (const auto* f = std::get_if<POverQSquared>(&qd.provenance())) {
    return POverQSquared{Complex(f->sign) * f->p, f->q, 1};
  }
  std::vector<Complex> half;
  for (const CriticalPoint& cp : qd.critical_points()) {
    if (!cp.is_pole() || cp.at.is_infinity()) continue;
    if (cp.signed_order % 2 != 0) return std::nullopt;
    for (int k = 0; k < -cp.signed_order / 2; ++k) half.push_back(cp.at.value());
  }
  // The denominator is monic, so q is too.
  return POverQSquared{qd.numerator(), Polynomial::from_roots(half, 1.0), 1};
}

QuadraticDifferential qd_from_p_over_q_squared(const Polynomial& p, const Polynomial& q, int sign) {
  if (p.is_zero() || q.is_zero()) throw Error(Errc::ZeroPolynomial, "p and q must be nonzero");
  if (sign != 1 && sign != -1) throw Error(Errc::InvalidArgument, "sign must be +1 or -1");
  if (!coprime_check(p, q)) throw Error(Errc::NotCoprime, "p and q share a root");
  return make_differential(Complex(sign) * p, q * q, POverQSquared{p, q, sign});
}

QuadraticDifferential lemniscate_qd(const Polynomial& p, const Polynomial& q) {
  if (p.is_zero() || q.is_zero()) throw Error(Errc::ZeroPolynomial, "p and q must be nonzero");
  if (!coprime_check(p, q)) throw Error(Errc::NotCoprime, "p and q share a root");
  const Polynomial n = p.derivative() * q - p * q.derivative();
  const double scale = std::max(p.coeff_scale(), 1.0) * std::max(q.coeff_scale(), 1.0);
  bool constant = true;
  for (const Complex c : n.coeffs())
    if (std::abs(c) > 1e-12 * scale) constant = false;
  if (constant) throw Error(Errc::ConstantRational, "r = p/q is constant");
  const Polynomial d = p * q;
  QuadraticDifferential base = qd_new(-(n * n), d * d);
  return make_differential(base.numerator(), base.denominator(), LemniscateForm{p, q});
}

QuadraticDifferential cauchy_qd(const Polynomial& p, const Polynomial& q, const Polynomial& r) {
  if (p.is_zero()) throw Error(Errc::ZeroPolynomial, "leading polynomial p must be nonzero");
  const Polynomial disc = q * q - Complex(4.0) * p * r;
  if (disc.is_zero()) throw Error(Errc::InvalidArgument, "discriminant q^2 - 4pr vanishes identically");
  QuadraticDifferential base = qd_new(-disc, p * p);
  return make_differential(base.numerator(), base.denominator(), CauchyForm{p, q, r});
}

namespace {

const CauchyForm& cauchy_form(const QuadraticDifferential& qd) {
  const auto* form = std::get_if<CauchyForm>(&qd.provenance());
  if (!form) throw Error(Errc::WrongProvenance, "differential was not built by cauchy_qd");
  return *form;
}

// Continued sqrt(q^2 - 4pr)/p along the polyline, one value per vertex.
std::vector<Complex> raw_density_values(const CauchyForm& f, std::span<const Complex> pts) {
  const Polynomial disc = f.q * f.q - Complex(4.0) * f.p * f.r;
  std::vector<Complex> out(pts.size());
  Complex ref{};
  bool seeded = false;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Complex v = disc(pts[i]);
    Complex s = seeded ? continue_sqrt(v, ref) : std::sqrt(v);
    if (std::abs(s) > 0) {
      ref = s;
      seeded = true;
    }
    out[i] = s / f.p(pts[i]);
  }
  return out;
}

std::size_t middle_vertex(std::span<const Complex> pts) {
  double total = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) total += std::abs(pts[i] - pts[i - 1]);
  double acc = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    acc += std::abs(pts[i] - pts[i - 1]);
    if (acc >= 0.5 * total) return i;
  }
  return pts.size() / 2;
}

Complex unit_tangent(std::span<const Complex> pts, std::size_t i) {
  const std::size_t a = (i == 0) ? 0 : i - 1;
  const std::size_t b = (i + 1 < pts.size()) ? i + 1 : i;
  const Complex d = pts[b] - pts[a];
  return d / std::abs(d);
}

}  // namespace

std::vector<Complex> measure_density(const QuadraticDifferential& qd, std::span<const Complex> polyline) {
  const CauchyForm& f = cauchy_form(qd);
  if (polyline.size() < 2) throw Error(Errc::InvalidArgument, "polyline needs at least two points");
  const std::vector<Complex> raw = raw_density_values(f, polyline);
  const Complex inv2pii = 1.0 / Complex(0.0, 2.0 * kPi);
  std::vector<Complex> out(polyline.size());
  for (std::size_t i = 0; i < polyline.size(); ++i) out[i] = inv2pii * raw[i] * unit_tangent(polyline, i);
  const std::size_t mid = middle_vertex(polyline);
  const Complex m = out[mid];
  if (std::abs(m.imag()) > 1e-6 * std::abs(m) || std::abs(m) == 0.0) {
    throw Error(Errc::BranchAmbiguity, "no sign choice makes the midpoint density real");
  }
  if (m.real() < 0)
    for (Complex& v : out) v = -v;
  return out;
}

Complex measure_mass(const QuadraticDifferential& qd, std::span<const Complex> polyline) {
  const CauchyForm& f = cauchy_form(qd);
  if (polyline.size() == 2) {
    const std::vector<Complex> three{polyline[0], 0.5 * (polyline[0] + polyline[1]), polyline[1]};
    return measure_mass(qd, three);
  }
  const std::vector<Complex> dens = measure_density(qd, polyline);
  const Polynomial disc = f.q * f.q - Complex(4.0) * f.p * f.r;
  const Complex inv2pii = 1.0 / Complex(0.0, 2.0 * kPi);
  // Reference branch per vertex: sign fixed so that density matches measure_density.
  const std::vector<Complex> raw = raw_density_values(f, polyline);
  const std::size_t mid = middle_vertex(polyline);
  const Complex first = inv2pii * raw[mid] * unit_tangent(polyline, mid);
  const double sign = (first.real() * dens[mid].real() < 0) ? -1.0 : 1.0;

  Complex mass{};
  const std::size_t n = polyline.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const Complex a = polyline[i], b = polyline[i + 1];
    // Branch reference: whichever endpoint has a nonvanishing value.
    Complex ref = sign * raw[i] * f.p(a);
    if (std::abs(ref) == 0.0) ref = sign * raw[i + 1] * f.p(b);
    auto integrand = [&](Complex z) {
      const Complex s = continue_sqrt(disc(z), ref);
      if (std::abs(s) > 0) ref = s;
      return inv2pii * s / f.p(z);
    };
    if (i + 2 == n) {
      // Integrate from the far end so the substitution sits at the endpoint zero.
      Complex refb = sign * raw[i + 1] * f.p(b);
      if (std::abs(refb) == 0.0) refb = sign * raw[i] * f.p(a);
      ref = refb;
      mass -= quad::chord_singular_start(b, a, integrand);
    } else if (i == 0) {
      mass += quad::chord_singular_start(a, b, integrand);
    } else {
      mass += quad::chord(a, b, integrand);
    }
  }
  return mass;
}

Complex measure_density_at(const QuadraticDifferential& qd, std::span<const Complex> polyline, Complex z) {
  const CauchyForm& f = cauchy_form(qd);
  const std::vector<Complex> dens = measure_density(qd, polyline);
  const std::vector<Complex> raw = raw_density_values(f, polyline);
  std::size_t seg = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
    const Complex a = polyline[i], d = polyline[i + 1] - a;
    const double n = std::norm(d);
    const double t = n == 0.0 ? 0.0 : std::clamp(((z - a) * std::conj(d)).real() / n, 0.0, 1.0);
    const double dist = std::abs(a + t * d - z);
    if (dist < best) best = dist, seg = i;
  }
  std::size_t v = seg;
  if (std::abs(raw[v]) == 0.0) v = seg + 1;
  const Complex inv2pii = 1.0 / Complex(0.0, 2.0 * kPi);
  const Complex unsigned_v = inv2pii * raw[v] * unit_tangent(polyline, v);
  const double sign = (unsigned_v.real() * dens[v].real() + unsigned_v.imag() * dens[v].imag() < 0) ? -1.0 : 1.0;
  const Polynomial disc = f.q * f.q - Complex(4.0) * f.p * f.r;
  const Complex s = continue_sqrt(disc(z), raw[v] * f.p(polyline[v]));
  const Complex d = polyline[seg + 1] - polyline[seg];
  return sign * inv2pii * s / f.p(z) * (d / std::abs(d));
}

}  // namespace qd
