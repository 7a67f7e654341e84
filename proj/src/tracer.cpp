#include "qd/tracer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <set>
#include <sstream>

#include "qd/error.hpp"
#include "qd/quadrature.hpp"

namespace qd {

double Window::diagonal() const noexcept { return std::hypot(width(), height()); }

Window Window::inflated(double factor) const noexcept {
  const Complex c = center();
  const double hw = 0.5 * width() * factor, hh = 0.5 * height() * factor;
  return {c.real() - hw, c.imag() - hh, c.real() + hw, c.imag() + hh};
}

const char* to_string(Termination t) noexcept {
  switch (t) {
    case Termination::Closed: return "Closed";
    case Termination::HitCritical: return "HitCritical";
    case Termination::EscapedWindow: return "EscapedWindow";
    case Termination::PhiLengthBudget: return "PhiLengthBudget";
    case Termination::StepBudget: return "StepBudget";
  }
  return "?";
}

double length_scale(const QuadraticDifferential& qd) { return std::max(1.0, qd.finite_critical_diameter()); }

Window default_window(const QuadraticDifferential& qd) {
  double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
  bool any = false;
  for (const CriticalPoint& cp : qd.critical_points()) {
    if (cp.at.is_infinity()) continue;
    const Complex z = cp.at.value();
    if (!any) {
      x0 = x1 = z.real();
      y0 = y1 = z.imag();
      any = true;
    } else {
      x0 = std::min(x0, z.real());
      x1 = std::max(x1, z.real());
      y0 = std::min(y0, z.imag());
      y1 = std::max(y1, z.imag());
    }
  }
  const Complex c{0.5 * (x0 + x1), 0.5 * (y0 + y1)};
  const double side = std::max(x1 - x0, y1 - y0);
  const double half = std::max(2.0 * side, 2.0);
  return {c.real() - half, c.imag() - half, c.real() + half, c.imag() + half};
}

TraceOptions TraceOptions::defaults_for(const QuadraticDifferential& qd) {
  TraceOptions o;
  const double diam = qd.finite_critical_diameter();
  o.max_phi_length = std::max(10.0, 100.0 * diam);
  o.window = default_window(qd);
  o.snap_radius = 1e-6 * length_scale(qd);
  if (const char* env = std::getenv("QD_MAX_STEPS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) o.max_steps = v;
  }
  return o;
}

void TraceOptions::validate() const {
  if (!(max_phi_length > 0) || !(snap_radius > 0) || !(rk_tol > 0) || max_steps <= 0 || !window.valid() ||
      !(max_step >= 0)) {
    throw Error(Errc::InvalidArgument, "trace options must be positive with a nonempty window");
  }
}

double drift_allowance(double phi_length) noexcept { return 1e-5 * std::max(1.0, phi_length / 100.0); }

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Site {
  Complex at;
  int order = 0;
  std::size_t node = 0;
  double guard = 0;    // terminate inside this radius (poles of order >= 2)
  double capture = 0;  // invariant-based capture radius (finite critical points)
  bool clamp_only = false;
};

struct Chart {
  bool at_infinity = false;
  Complex center{};
  Polynomial num, den;
  std::vector<Site> sites;
  double snap = 0;

  Complex phi(Complex x) const { return num(x) / den(x); }
  Complex to_z(Complex x) const { return at_infinity ? center + 1.0 / x : x; }
  Complex from_z(Complex z) const { return at_infinity ? 1.0 / (z - center) : z; }
  Complex w_to_z(Complex x, Complex w) const { return at_infinity ? -w * x * x : w; }
  Complex w_from_z(Complex x, Complex wz) const { return at_infinity ? -wz / (x * x) : wz; }
};

struct Model {
  Chart zc;
  std::optional<Chart> uc;
  Window window;
  Window inner;
};

Model build_model(const QuadraticDifferential& qd, double sign, const TraceOptions& opts) {
  Model m;
  m.window = opts.window;
  m.inner = opts.window.inflated(0.9);
  m.zc.num = Complex(sign) * qd.numerator();
  m.zc.den = qd.denominator();
  m.zc.snap = opts.snap_radius;
  const auto& crit = qd.critical_points();
  for (std::size_t i = 0; i < crit.size(); ++i) {
    if (crit[i].at.is_infinity()) continue;
    Site s;
    s.at = crit[i].at.value();
    s.order = crit[i].signed_order;
    s.node = i;
    s.guard = qd.guard_radius(i);
    s.capture = crit[i].is_finite_critical() ? 0.1 * qd.local_scale(i) : 0.0;
    m.zc.sites.push_back(s);
  }
  // No trajectory tends to a circular double pole, so rays leaving the window
  // toward one are followed around it just like through a regular infinity.
  const bool circular_infinity =
      qd.order_at_infinity() == -2 && classify_double_pole(qd, SpherePoint::infinity()) == DoublePoleKind::Circular;
  if (qd.order_at_infinity() >= -1 || circular_infinity) {
    Chart u;
    u.at_infinity = true;
    u.center = opts.window.center();
    const InfinityChart ic = qd.infinity_chart(u.center);
    u.num = Complex(sign) * ic.num;
    u.den = ic.den;
    const double half = 0.5 * std::max(opts.window.width(), opts.window.height());
    u.snap = opts.snap_radius / (half * half);
    for (const Site& zs : m.zc.sites) {
      Site s = zs;
      s.at = 1.0 / (zs.at - u.center);
      s.clamp_only = true;
      u.sites.push_back(s);
    }
    if (const auto inf = qd.infinity_index()) {
      Site s;
      s.at = 0.0;
      s.order = crit[*inf].signed_order;
      s.node = *inf;
      s.guard = 1e-3 / half;
      s.capture = 0.1 / half;
      u.sites.push_back(s);
    }
    m.uc = std::move(u);
  }
  return m;
}

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695, e4 = b4 - 393.0 / 640,
                 e5 = b5 + 92097.0 / 339200, e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;

struct StepResult {
  Complex x;
  Complex err;
  Complex k7;
};

template <class F>
StepResult dp5_step(F&& f, Complex x, Complex k1, double h) {
  (void)c2, (void)c3, (void)c4, (void)c5;
  const Complex k2 = f(x + h * (a21 * k1));
  const Complex k3 = f(x + h * (a31 * k1 + a32 * k2));
  const Complex k4 = f(x + h * (a41 * k1 + a42 * k2 + a43 * k3));
  const Complex k5 = f(x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
  const Complex k6 = f(x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
  const Complex xn = x + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
  const Complex k7 = f(xn);
  const Complex err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
  return {xn, err, k7};
}

// int_a^b sqrt(phi) dx along the chord, branch continued from w_a at a.
Complex chord_integral(const Chart& ch, Complex a, Complex b, Complex w_a) {
  Complex ref = w_a;
  return quad::chord(a, b, [&](Complex x) {
    ref = continue_sqrt(ch.phi(x), ref);
    return ref;
  });
}

// int_s^x sqrt(phi) dx for a finite critical site s, branch anchored at x.
Complex integral_from_site(const Chart& ch, Complex s, Complex x, Complex w_x) {
  const Complex d = x - s;
  std::array<Complex, quad::kNodes.size()> w{};
  Complex ref = w_x;
  for (std::size_t i = quad::kNodes.size(); i-- > 0;) {
    const double t = quad::kNodes[i];
    ref = continue_sqrt(ch.phi(s + t * t * d), ref);
    w[i] = ref;
  }
  Complex acc{};
  for (std::size_t i = 0; i < w.size(); ++i) acc += quad::kWeights[i] * 2.0 * quad::kNodes[i] * w[i];
  return acc * d;
}

struct TraceSeed {
  Complex z0;
  int orientation = 1;
  std::optional<Complex> heading;         // choose the branch so the ray starts along this
  std::optional<std::size_t> source;      // critical point the ray leaves from
  std::optional<Complex> source_location;
  double initial_length = 0.0;
  Complex initial_integral{};
};

double nearest_site(const Chart& ch, Complex x) {
  double d = kInf;
  for (const Site& s : ch.sites) d = std::min(d, std::abs(x - s.at));
  return d;
}

class Tracer {
 public:
  Tracer(const Model& model, const TraceOptions& opts) : m_(model), opts_(opts) {}

  TrajectoryRay run(const TraceSeed& seed) {
    TrajectoryRay ray;
    ray.orientation = seed.orientation;
    const Chart* ch = &m_.zc;
    Complex x = seed.z0;
    const Complex phi0 = ch->phi(x);
    if (!std::isfinite(phi0.real()) || !std::isfinite(phi0.imag()) || phi0 == Complex{}) {
      throw Error(Errc::StartTooClose, "start point is a critical point");
    }
    Complex w = std::sqrt(phi0);
    if (seed.heading) {
      if ((Complex(seed.orientation) / w / *seed.heading).real() < 0) w = -w;
    }
    const Complex w0 = w;
    const double orient = seed.orientation;
    ray.direction_seed = (orient / w0) / std::abs(w0);
    ray.source_point = seed.source;
    ray.chart_center = m_.window.center();

    if (seed.source_location) push(ray, *ch, *seed.source_location, 0.0, w0, false);
    double tau = seed.initial_length;
    Complex acc = seed.initial_integral;
    double drift = std::abs(acc.imag());
    push(ray, *ch, x, tau, w, false);

    bool departed = false;
    bool departed_source = !seed.source.has_value();
    const double depart_radius = 1e3 * opts_.snap_radius;
    double source_capture = 0.0;
    if (seed.source) {
      for (const Site& s : m_.zc.sites)
        if (s.node == *seed.source) source_capture = s.capture;
    }

    auto rhs_for = [&](const Chart& c, Complex wref) {
      return [&c, wref, orient](Complex y) { return orient / continue_sqrt(c.phi(y), wref); };
    };

    double h = std::min(0.1 * std::min(nearest_site(*ch, x), 1.0) * std::abs(w), 0.01 * opts_.max_phi_length);
    Complex k1 = orient / w;
    long steps = 0;
    ray.termination = Termination::PhiLengthBudget;
    std::set<std::size_t> near_miss_reported;

    while (true) {
      if (tau >= opts_.max_phi_length * (1 - 1e-15)) {
        ray.termination = Termination::PhiLengthBudget;
        break;
      }
      if (steps >= opts_.max_steps) {
        ray.termination = Termination::StepBudget;
        break;
      }
      const double dmin = nearest_site(*ch, x);
      const double hmax_geom = 0.1 * dmin * std::abs(w);
      h = std::min({h, hmax_geom, opts_.max_phi_length - tau});
      if (opts_.max_step > 0) h = std::min(h, opts_.max_step);
      if (!(h > 0)) {
        ray.termination = Termination::StepBudget;
        break;
      }
      auto f = rhs_for(*ch, w);
      const StepResult sr = dp5_step(f, x, k1, h);
      ++steps;
      const double err = std::abs(sr.err) * std::abs(w);
      const bool finite = std::isfinite(sr.x.real()) && std::isfinite(sr.x.imag()) && std::isfinite(err);
      if (!finite || err > opts_.rk_tol) {
        const double fac = finite && err > 0 ? std::max(0.2, 0.9 * std::pow(opts_.rk_tol / err, 0.25)) : 0.2;
        h *= fac;
        continue;
      }
      const Complex x_old = x, w_old = w;
      const double h_taken = h;
      x = sr.x;
      w = continue_sqrt(ch->phi(x), w_old);
      k1 = sr.k7;
      const Complex piece = chord_integral(*ch, x_old, x, w_old);
      const double grow = err > 0 ? std::min(5.0, 0.9 * std::pow(opts_.rk_tol / err, 0.2)) : 5.0;
      h = h_taken * std::max(0.2, grow);

      // Closure: back through z0 heading the same way.
      if (!ch->at_infinity && departed && closure(ray, *ch, x_old, w_old, h_taken, seed.z0, w0, orient, tau, acc)) {
        drift = std::max(drift, std::abs(acc.imag()));
        break;
      }

      tau += h_taken;
      acc += piece;
      drift = std::max(drift, std::abs(acc.imag()));
      push(ray, *ch, x, tau, w, ch->at_infinity);

      const Complex zx = ch->to_z(x);
      if (!departed && std::abs(zx - seed.z0) > depart_radius) departed = true;

      // Critical sites.
      bool stop = false;
      for (const Site& s : ch->sites) {
        if (s.clamp_only) continue;
        const double dist = std::abs(x - s.at);
        if (s.order <= -2) {
          if (dist <= s.guard) {
            ray.termination = Termination::HitCritical;
            ray.hit_point = s.node;
            ray.incoming_angle = std::arg(ch->to_z(x_old) - ch->to_z(s.at));
            stop = true;
          }
          continue;
        }
        const bool is_source = seed.source && s.node == *seed.source && !ch->at_infinity;
        if (is_source && !departed_source) {
          if (dist > std::max(source_capture, 2.0 * depart_radius)) departed_source = true;
          continue;
        }
        if (dist > std::max(s.capture, ch->snap)) continue;
        const Complex H = integral_from_site(*ch, s.at, x, w);
        const bool approaching = orient * H.real() < 0;
        const double tol = 1e-7 * (1.0 + std::abs(H)) + 2.0 * drift;
        const bool on_trajectory = approaching && std::abs(H.imag()) <= tol;
        if (on_trajectory) {
          ray.termination = Termination::HitCritical;
          ray.hit_point = s.node;
          ray.incoming_angle = std::arg(ch->to_z(x) - ch->to_z(s.at));
          if (!ch->at_infinity) {
            tau += std::abs(H.real());
            acc -= H;
            drift = std::max(drift, std::abs(acc.imag()));
            push(ray, *ch, s.at, tau, Complex{}, false);
          }
          stop = true;
        } else if (dist <= ch->snap && near_miss_reported.insert(s.node).second) {
          // Inside the snap disk but off the critical leaf: the ray passes by.
          std::ostringstream os;
          os << "near miss of critical point " << s.node << " at distance " << dist << " (Im H = " << H.imag() << ")";
          ray.diagnostics.push_back(os.str());
        }
      }
      if (stop) break;

      // Window and chart switching.
      if (!ch->at_infinity && !m_.window.contains(zx)) {
        if (!m_.uc) {
          ray.termination = Termination::EscapedWindow;
          break;
        }
        const Complex wz = w;
        ch = &*m_.uc;
        x = ch->from_z(zx);
        w = ch->w_from_z(x, wz);
        k1 = orient / w;
      } else if (ch->at_infinity && m_.inner.contains(zx)) {
        const Complex wz = ch->w_to_z(x, w);
        ch = &m_.zc;
        x = zx;
        w = wz;
        k1 = orient / w;
      }
    }

    ray.phi_length = tau;
    ray.imag_drift = drift;
    if (drift > drift_allowance(tau)) {
      std::ostringstream os;
      os << "imag drift " << drift << " exceeds allowance " << drift_allowance(tau) << " at phi-length " << tau;
      ray.diagnostics.push_back(os.str());
    }
    return ray;
  }

 private:
  static void push(TrajectoryRay& ray, const Chart& ch, Complex x, double tau, Complex w, bool inf) {
    ray.points.push_back(ch.to_z(x));
    ray.taus.push_back(tau);
    ray.sqrt_values.push_back(ch.w_to_z(x, w));
    ray.in_infinity_chart.push_back(inf ? 1 : 0);
  }

  bool closure(TrajectoryRay& ray, const Chart& ch, Complex x_old, Complex w_old, double h_taken, Complex z0,
               Complex w0, double orient, double& tau, Complex& acc) {
    const double reach = std::abs(ch.to_z(x_old) - z0);
    const double step_len = std::abs(h_taken / w_old) * 2.0;
    if (reach > step_len + 10.0 * opts_.snap_radius) return false;
    // H(x_old) = int_{z0}^{x_old} w dz, continuing the ray's branch back to z0.
    Complex ref = w_old;
    const Complex back = quad::chord(x_old, z0, [&](Complex y) {
      ref = continue_sqrt(ch.phi(y), ref);
      return ref;
    });
    const Complex w_at_z0 = continue_sqrt(ch.phi(z0), ref);
    if (std::abs(w_at_z0 - w0) > std::abs(w_at_z0 + w0)) return false;
    const Complex H = -back;
    const double s_star = -orient * H.real();
    if (s_star < -1e-12 || s_star > h_taken) return false;
    if (std::abs(H.imag()) > opts_.snap_radius * std::abs(w0)) return false;
    // Partial step to the crossing.
    Complex z_end = x_old;
    if (s_star > 0) {
      auto f = [&ch, w_old, orient](Complex y) { return orient / continue_sqrt(ch.phi(y), w_old); };
      z_end = dp5_step(f, x_old, orient / w_old, s_star).x;
    }
    const Complex w_end = continue_sqrt(ch.phi(z_end), w_old);
    acc += chord_integral(ch, x_old, z_end, w_old);
    tau += s_star;
    push(ray, ch, z_end, tau, w_end, false);
    ray.termination = Termination::Closed;
    return true;
  }

  const Model& m_;
  const TraceOptions& opts_;
};

void check_start(const QuadraticDifferential& qd, Complex z0, const TraceOptions& opts) {
  if (!std::isfinite(z0.real()) || !std::isfinite(z0.imag())) {
    throw Error(Errc::InvalidArgument, "start point must be finite");
  }
  for (const CriticalPoint& cp : qd.critical_points()) {
    if (cp.at.is_infinity()) continue;
    if (std::abs(cp.at.value() - z0) <= opts.snap_radius) {
      throw Error(Errc::StartTooClose, "start point lies within the snap radius of a critical point");
    }
  }
}

TrajectoryRay trace_signed(const QuadraticDifferential& qd, Complex z0, int orientation, const TraceOptions& opts,
                           bool vertical) {
  opts.validate();
  if (orientation != 1 && orientation != -1) throw Error(Errc::InvalidArgument, "orientation must be +1 or -1");
  check_start(qd, z0, opts);
  const Model model = build_model(qd, vertical ? -1.0 : 1.0, opts);
  TraceSeed seed;
  seed.z0 = z0;
  seed.orientation = orientation;
  TrajectoryRay ray = Tracer(model, opts).run(seed);
  ray.vertical = vertical;
  return ray;
}

bool ends_at_critical(const QuadraticDifferential& qd, const TrajectoryRay& ray) {
  if (ray.termination != Termination::HitCritical || !ray.hit_point || ray.points.empty()) return false;
  const CriticalPoint& cp = qd.critical_points()[*ray.hit_point];
  return cp.is_finite_critical() && !cp.at.is_infinity() && ray.points.back() == cp.at.value();
}

const Chart& chart_for_point(const Model& m, std::uint8_t flag) { return flag ? *m.uc : m.zc; }

// Per-segment integral of sqrt(phi) dz (complex) using stored branch values.
template <class Visit>
void for_each_segment(const QuadraticDifferential& qd, const TrajectoryRay& ray, Visit&& visit) {
  TraceOptions o = TraceOptions::defaults_for(qd);
  const Complex shift = ray.chart_center - o.window.center();
  o.window = {o.window.x0 + shift.real(), o.window.y0 + shift.imag(), o.window.x1 + shift.real(),
              o.window.y1 + shift.imag()};
  const Model m = build_model(qd, ray.vertical ? -1.0 : 1.0, o);
  const std::size_t n = ray.points.size();
  const bool singular_first = ray.source_point.has_value();
  const bool singular_last = ends_at_critical(qd, ray);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::uint8_t flag = ray.in_infinity_chart[i + 1];
    const Chart& ch = (flag && m.uc) ? chart_for_point(m, flag) : m.zc;
    const Complex a = ch.from_z(ray.points[i]);
    const Complex b = ch.from_z(ray.points[i + 1]);
    Complex integral;
    if (i == 0 && singular_first) {
      const Complex wb = ch.w_from_z(b, ray.sqrt_values[i + 1]);
      integral = integral_from_site(ch, a, b, wb);
    } else if (i + 2 == n && singular_last) {
      const Complex wa = ch.w_from_z(a, ray.sqrt_values[i]);
      integral = -integral_from_site(ch, b, a, wa);
    } else {
      const Complex wa = ch.w_from_z(a, ray.sqrt_values[i]);
      integral = chord_integral(ch, a, b, wa);
    }
    visit(i, ch, a, b, integral);
  }
}

}  // namespace

TrajectoryRay trace_horizontal(const QuadraticDifferential& qd, Complex z0, int orientation,
                               const TraceOptions& opts) {
  return trace_signed(qd, z0, orientation, opts, false);
}

TrajectoryRay trace_vertical(const QuadraticDifferential& qd, Complex z0, int orientation,
                             const TraceOptions& opts) {
  return trace_signed(qd, z0, orientation, opts, true);
}

TrajectoryRay trace_from_critical(const QuadraticDifferential& qd, std::size_t cp_index, int direction_index,
                                  const TraceOptions& opts) {
  opts.validate();
  const auto& crit = qd.critical_points();
  if (cp_index >= crit.size()) throw Error(Errc::IndexOutOfRange, "critical point index out of range");
  const CriticalPoint& cp = crit[cp_index];
  const std::vector<Complex> dirs = critical_directions(qd, cp);
  if (direction_index < 0 || direction_index >= static_cast<int>(dirs.size())) {
    throw Error(Errc::IndexOutOfRange, "direction index out of range");
  }
  const Complex c = cp.at.value();
  const Complex heading = dirs[static_cast<std::size_t>(direction_index)];
  const double eps = 10.0 * opts.snap_radius;
  const Complex z0 = c + eps * heading;

  const Model model = build_model(qd, 1.0, opts);
  TraceSeed seed;
  seed.z0 = z0;
  seed.orientation = 1;
  seed.heading = heading;
  seed.source = cp_index;
  seed.source_location = c;
  // phi-length already travelled from c to z0.
  Complex w0 = std::sqrt(model.zc.phi(z0));
  if ((1.0 / w0 / heading).real() < 0) w0 = -w0;
  const Complex H = integral_from_site(model.zc, c, z0, w0);
  seed.initial_length = std::abs(H.real());
  seed.initial_integral = H;
  TrajectoryRay ray = Tracer(model, opts).run(seed);
  return ray;
}

double phi_length_of(const QuadraticDifferential& qd, std::span<const Complex> polyline) {
  const auto& crit = qd.critical_points();
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
    const Complex a = polyline[i], b = polyline[i + 1];
    for (const CriticalPoint& cp : crit) {
      if (!cp.is_pole() || cp.at.is_infinity()) continue;
      const Complex p = cp.at.value();
      const Complex d = b - a;
      const double t = std::clamp(d == Complex{} ? 0.0 : ((p - a) * std::conj(d)).real() / std::norm(d), 0.0, 1.0);
      if (std::abs(a + t * d - p) <= 1e-12 * std::max(1.0, std::abs(p))) {
        throw Error(Errc::PoleOnPath, "polyline passes through a pole");
      }
    }
    std::array<Complex, quad::kNodes.size()> nodes{};
    for (std::size_t k = 0; k < nodes.size(); ++k) nodes[k] = a + quad::kNodes[k] * (b - a);
    const auto pv = qd.numerator().eval_many(nodes);
    const auto qv = qd.denominator().eval_many(nodes);
    double seg = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) seg += quad::kWeights[k] * std::sqrt(std::abs(pv[k] / qv[k]));
    total += seg * std::abs(b - a);
  }
  return total;
}

double phi_length_of(const QuadraticDifferential& qd, const TrajectoryRay& ray) {
  double total = 0.0;
  const std::size_t n = ray.points.size();
  const bool singular_first = ray.source_point.has_value();
  const bool singular_last = ends_at_critical(qd, ray);
  const bool uses_chart =
      std::any_of(ray.in_infinity_chart.begin(), ray.in_infinity_chart.end(), [](std::uint8_t f) { return f != 0; });
  std::optional<InfinityChart> ic;
  if (uses_chart) ic = qd.infinity_chart(ray.chart_center);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    Complex a = ray.points[i], b = ray.points[i + 1];
    const bool in_u = ray.in_infinity_chart[i + 1] && ic;
    auto density = [&](Complex x) {
      if (in_u) return std::sqrt(std::abs(ic->num(x) / ic->den(x)));
      return std::sqrt(std::abs(qd(x)));
    };
    if (in_u) {
      a = 1.0 / (a - ic->center);
      b = 1.0 / (b - ic->center);
    }
    if ((i == 0 && singular_first) || (i + 2 == n && singular_last)) {
      const Complex s = (i == 0 && singular_first) ? a : b;
      const Complex t = (i == 0 && singular_first) ? b : a;
      const Complex d = t - s;
      double acc = 0.0;
      for (std::size_t k = 0; k < quad::kNodes.size(); ++k) {
        const double u = quad::kNodes[k];
        acc += quad::kWeights[k] * 2.0 * u * density(s + u * u * d);
      }
      total += acc * std::abs(d);
    } else {
      total += quad::chord_abs(a, b, density);
    }
  }
  return total;
}

double imag_drift_of(const QuadraticDifferential& qd, const TrajectoryRay& ray) {
  Complex acc{};
  double drift = 0.0;
  for_each_segment(qd, ray, [&](std::size_t, const Chart&, Complex, Complex, Complex integral) {
    acc += integral;
    drift = std::max(drift, std::abs(acc.imag()));
  });
  return drift;
}

}  // namespace qd
