#include "qd/level.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <thread>

#include "qd/error.hpp"
#include "qd/quadrature.hpp"

namespace qd {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kMaxDetours = 16;
constexpr double kArcStep = 0.2;

double cross(Complex a, Complex b) { return a.real() * b.imag() - a.imag() * b.real(); }

bool lex_before(Complex a, Complex b) {
  return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
}

// Parameters (t on a->b, u on c->d) of a proper intersection.
std::optional<std::pair<double, double>> intersect(Complex a, Complex b, Complex c, Complex d) {
  const Complex r = b - a, s = d - c;
  const double den = cross(r, s);
  if (std::abs(den) <= 1e-14 * std::abs(r) * std::abs(s)) return std::nullopt;
  const double t = cross(c - a, s) / den;
  const double u = cross(c - a, r) / den;
  constexpr double eps = 1e-12;
  if (t <= eps || t >= 1.0 - eps || u < 0.0 || u > 1.0) return std::nullopt;
  return std::make_pair(t, u);
}

bool segment_crosses(Complex a, Complex b, const std::vector<Complex>& poly) {
  for (std::size_t j = 0; j + 1 < poly.size(); ++j) {
    const Complex r = b - a, s = poly[j + 1] - poly[j];
    const double den = cross(r, s);
    if (den == 0.0) continue;
    const double t = cross(poly[j] - a, s) / den;
    const double u = cross(poly[j] - a, r) / den;
    if (t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0) return true;
  }
  return false;
}

// Running value sigma * Im(A) + kappa with the branch of sqrt(p) carried along.
struct Walker {
  const Polynomial& p;
  const Polynomial& q;
  const std::vector<Complex>& singular;
  double hmin;
  Complex acc{};
  Complex w{};
  double sigma = 1.0;
  double kappa = 0.0;

  double value() const { return sigma * acc.imag() + kappa; }

  void line(Complex a, Complex b) {
    const double len = std::abs(b - a);
    if (len == 0.0) return;
    const Complex dir = (b - a) / len;
    double t = 0.0;
    while (t < len) {
      const Complex z = a + t * dir;
      double d = std::numeric_limits<double>::infinity();
      for (const Complex s : singular) d = std::min(d, std::abs(z - s));
      const double h = std::min(std::max(0.25 * d, hmin), len - t);
      Complex piece{};
      for (std::size_t k = 0; k < quad::kNodes.size(); ++k) {
        const Complex x = z + quad::kNodes[k] * h * dir;
        const Complex pv = p(x);
        w = w == Complex{} ? std::sqrt(pv) : continue_sqrt(pv, w);
        piece += quad::kWeights[k] * w / q(x);
      }
      acc += piece * h * dir;
      t += h;
    }
  }
};

}  // namespace

LevelFunction::LevelFunction(const QuadraticDifferential& qd, const CriticalGraph& graph,
                             const PairingResult& pairing) {
  const auto form = p_over_q_squared_form(qd);
  if (!form) throw Error(Errc::WrongProvenance, "the level function needs phi in p/q^2 form");
  p_ = form->p;
  q_ = form->q;
  scale_ = length_scale(qd);

  const auto& crit = qd.critical_points();
  std::vector<std::size_t> zeros;
  for (std::size_t i = 0; i < crit.size(); ++i) {
    if (crit[i].at.is_infinity()) continue;
    const Complex c = crit[i].at.value();
    obstacles_.push_back({c, 2.0 * qd.guard_radius(i), crit[i].is_pole()});
    singular_.push_back(c);
    if (crit[i].is_zero()) zeros.push_back(i);
  }

  const auto& pairs =
      std::holds_alternative<Pairing>(pairing) ? std::get<Pairing>(pairing).pairs : std::get<PairingFailure>(pairing).partial;
  for (const auto& [a, b] : pairs) {
    for (const CriticalEdge& e : graph.edges) {
      if (!e.is_short) continue;
      if ((e.from_node == a && e.to_node == b) || (e.from_node == b && e.to_node == a)) {
        cuts_.push_back(e.polyline);
        break;
      }
    }
  }

  if (!zeros.empty()) {
    std::size_t first = zeros.front();
    for (std::size_t i : zeros)
      if (lex_before(crit[i].at.value(), crit[first].at.value())) first = i;
    base_ = crit[first].at.value();
    // Leave the zero away from its cut, if it has one.
    double alpha = kPi;
    for (const auto& cut : cuts_) {
      if (cut.size() < 2) continue;
      if (cut.front() == base_) alpha = std::arg(base_ - cut[1]);
      else if (cut.back() == base_) alpha = std::arg(base_ - cut[cut.size() - 2]);
    }
    const double rho = 4.0 * qd.guard_radius(first);
    start_ = base_ + std::polar(rho, alpha);
    start_sqrt_ = std::sqrt(p_(start_));
    // int_{base}^{start} with z = base + (start - base) s^2, branch fixed at start.
    const Complex d = start_ - base_;
    std::array<Complex, quad::kNodes.size()> vals{};
    Complex ref = start_sqrt_;
    for (std::size_t k = quad::kNodes.size(); k-- > 0;) {
      const double s = quad::kNodes[k];
      const Complex x = base_ + s * s * d;
      ref = continue_sqrt(p_(x), ref);
      vals[k] = ref / q_(x);
    }
    Complex acc{};
    for (std::size_t k = 0; k < vals.size(); ++k) acc += quad::kWeights[k] * 2.0 * quad::kNodes[k] * vals[k];
    start_integral_ = acc * d;
  } else {
    const Complex candidates[] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}, {2, 0}, {0, 2}};
    base_ = candidates[0];
    for (const Complex c : candidates) {
      bool clear = true;
      for (const Obstacle& o : obstacles_)
        if (std::abs(c - o.c) <= 10.0 * o.r) clear = false;
      if (clear) {
        base_ = c;
        break;
      }
    }
    start_ = base_;
    start_sqrt_ = std::sqrt(p_(start_));
    start_integral_ = 0.0;
  }
}

double LevelFunction::density(Complex z) const { return std::sqrt(std::abs(p_(z))) / std::abs(q_(z)); }

bool LevelFunction::masked(Complex z) const {
  for (const Obstacle& o : obstacles_)
    if (o.pole && std::abs(z - o.c) <= o.r) return true;
  return false;
}

std::vector<Complex> LevelFunction::route(Complex a, Complex b, bool flip_poles) const {
  std::vector<Complex> out{a};
  const Complex d = b - a;
  const double dd = std::norm(d);
  if (dd == 0.0) {
    out.push_back(b);
    return out;
  }
  struct Hit {
    double t_in, t_out;
    const Obstacle* o;
  };
  std::vector<Hit> hits;
  for (const Obstacle& o : obstacles_) {
    if (std::abs(a - o.c) <= o.r * (1 + 1e-9) || std::abs(b - o.c) <= o.r * (1 + 1e-9)) continue;
    const double t0 = ((o.c - a) * std::conj(d)).real() / dd;
    const double perp = std::abs(cross(d, o.c - a)) / std::sqrt(dd);
    if (perp >= o.r || t0 <= 0.0 || t0 >= 1.0) continue;
    const double hc = std::sqrt(o.r * o.r - perp * perp) / std::sqrt(dd);
    hits.push_back({t0 - hc, t0 + hc, &o});
  }
  std::sort(hits.begin(), hits.end(), [](const Hit& x, const Hit& y) { return x.t_in < y.t_in; });
  if (static_cast<int>(hits.size()) > kMaxDetours) throw Error(Errc::PathBlocked, "too many obstacles on the route");
  for (std::size_t k = 0; k + 1 < hits.size(); ++k) {
    if (hits[k + 1].t_in <= hits[k].t_out) throw Error(Errc::PathBlocked, "overlapping obstacles on the route");
  }
  for (const Hit& h : hits) {
    const Complex c = h.o->c;
    const Complex entry = a + h.t_in * d, exit = a + h.t_out * d;
    const double side = (h.o->pole && flip_poles) ? -1.0 : 1.0;
    const double th0 = std::arg(entry - c), th1 = std::arg(exit - c);
    double ccw = std::fmod(th1 - th0 + 4 * kPi, 2 * kPi);
    const Complex mid = c + std::polar(h.o->r, th0 + 0.5 * ccw);
    const bool mid_left = cross(d, mid - c) > 0;
    const double sweep = (mid_left == (side > 0)) ? ccw : ccw - 2 * kPi;
    const int steps = std::max(2, static_cast<int>(std::ceil(std::abs(sweep) / kArcStep)));
    out.push_back(entry);
    for (int k = 1; k < steps; ++k) out.push_back(c + std::polar(h.o->r, th0 + sweep * k / steps));
    out.push_back(exit);
  }
  out.push_back(b);
  return out;
}

double LevelFunction::integrate(const std::vector<Complex>& path) const {
  Walker wk{p_, q_, singular_, 1e-7 * scale_};
  wk.acc = start_integral_;
  wk.w = start_sqrt_;
  struct Crossing {
    double t;
    const std::vector<Complex>* cut;
    std::size_t j;
    double u;
  };
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const Complex a = path[i], b = path[i + 1];
    std::vector<Crossing> xs;
    for (const auto& cut : cuts_) {
      for (std::size_t j = 0; j + 1 < cut.size(); ++j) {
        if (auto hit = intersect(a, b, cut[j], cut[j + 1])) xs.push_back({hit->first, &cut, j, hit->second});
      }
    }
    std::sort(xs.begin(), xs.end(), [](const Crossing& x, const Crossing& y) { return x.t < y.t; });
    Complex pos = a;
    for (const Crossing& x : xs) {
      const Complex c = a + x.t * (b - a);
      wk.line(pos, c);
      // Level of the cut, read at a vertex lying on the trajectory.
      const Complex v = x.u < 0.5 ? (*x.cut)[x.j] : (*x.cut)[x.j + 1];
      Walker probe = wk;
      probe.line(c, v);
      const double lambda = probe.value();
      wk.sigma = -wk.sigma;
      wk.kappa = 2.0 * lambda - wk.kappa;
      pos = c;
    }
    wk.line(pos, b);
  }
  return wk.value();
}

double LevelFunction::evaluate_via(Complex z, Complex waypoint) const {
  std::vector<Complex> path = route(start_, waypoint, false);
  const std::vector<Complex> tail = route(waypoint, z, false);
  path.insert(path.end(), tail.begin() + 1, tail.end());
  return integrate(path);
}

LevelSample LevelFunction::evaluate_unchecked(Complex z) const {
  for (std::size_t i = 0; i < obstacles_.size(); ++i) {
    const Obstacle& o = obstacles_[i];
    if (o.pole && std::abs(z - o.c) <= 0.5 * o.r) throw Error(Errc::PoleOnPath, "point lies in a pole guard disk");
  }
  const std::vector<Complex> first = route(start_, z, false);
  LevelSample s;
  s.value = integrate(first);

  // Second route: the pole detours on the other side, or a loop around the
  // pole nearest to the straight route when none is in the way.
  bool pole_on_route = false;
  const Complex d = z - start_;
  const double dd = std::norm(d);
  const Obstacle* nearest = nullptr;
  double best = std::numeric_limits<double>::infinity();
  Complex foot{};
  for (const Obstacle& o : obstacles_) {
    if (!o.pole) continue;
    const double t = dd == 0.0 ? 0.0 : std::clamp(((o.c - start_) * std::conj(d)).real() / dd, 0.0, 1.0);
    const Complex f = start_ + t * d;
    const double dist = std::abs(f - o.c);
    if (dist < o.r && std::abs(z - o.c) > o.r && std::abs(start_ - o.c) > o.r) pole_on_route = true;
    if (dist < best && std::abs(z - o.c) > o.r) {
      best = dist;
      nearest = &o;
      foot = f;
    }
  }
  if (pole_on_route) {
    s.second_value = integrate(route(start_, z, true));
  } else if (nearest && best > nearest->r) {
    const Complex e = nearest->c + nearest->r * (foot - nearest->c) / std::abs(foot - nearest->c);
    std::vector<Complex> path = route(start_, foot, false);
    auto append = [&path](const std::vector<Complex>& more) { path.insert(path.end(), more.begin() + 1, more.end()); };
    append(route(foot, e, false));
    const double th0 = std::arg(e - nearest->c);
    constexpr int kLoop = 48;
    for (int k = 1; k <= kLoop; ++k) path.push_back(nearest->c + std::polar(nearest->r, th0 + 2 * kPi * k / kLoop));
    path.back() = e;
    append(route(e, foot, false));
    append(route(foot, z, false));
    s.second_value = integrate(path);
  } else {
    s.second_value = s.value;
  }
  s.gap = std::abs(s.value - s.second_value);
  return s;
}

LevelSample LevelFunction::evaluate(Complex z) const {
  const LevelSample s = evaluate_unchecked(z);
  if (s.gap > 1e-6 * (1.0 + std::abs(s.value))) {
    throw ResidueObstructionError(s.gap, s.value, "level function depends on the path around a pole");
  }
  return s;
}

LevelFunction make_level_function(const QuadraticDifferential& qd) {
  const CriticalGraph g = build_critical_graph(qd);
  return LevelFunction(qd, g, pair_zeros_by_short_trajectories(qd, g));
}

double level_function(const QuadraticDifferential& qd, const PairingResult& pairing, Complex z) {
  const CriticalGraph g = build_critical_graph(qd);
  return LevelFunction(qd, g, pairing)(z);
}

Complex LevelField::sample_point(int i, int j) const {
  if (n <= 1) return window.center();
  const double dx = window.width() / (n - 1), dy = window.height() / (n - 1);
  return {window.x0 + i * dx, window.y0 + j * dy};
}

LevelField level_grid(const LevelFunction& lf, const Window& window, int n) {
  if (n < 1) throw Error(Errc::InvalidArgument, "grid size must be positive");
  if (!window.valid()) throw Error(Errc::InvalidArgument, "empty window");
  LevelField f;
  f.base_point = lf.base_point();
  f.cuts = lf.cuts();
  f.window = window;
  f.n = n;
  const std::size_t total = static_cast<std::size_t>(n) * n;
  f.values.assign(total, std::numeric_limits<double>::quiet_NaN());
  f.mask.assign(total, 0);
  std::vector<double> gaps(static_cast<std::size_t>(n), 0.0);

  auto rows = [&](int j0, int j1) {
    for (int j = j0; j < j1; ++j) {
      for (int i = 0; i < n; ++i) {
        const std::size_t k = static_cast<std::size_t>(j) * n + i;
        const Complex z = f.sample_point(i, j);
        if (lf.masked(z)) {
          f.mask[k] = 1;
          continue;
        }
        const LevelSample s = lf.evaluate(z);
        f.values[k] = s.value;
        gaps[static_cast<std::size_t>(j)] = std::max(gaps[static_cast<std::size_t>(j)], s.gap);
      }
    }
  };
  const int workers = std::clamp(static_cast<int>(std::thread::hardware_concurrency()), 1, 8);
  if (workers == 1 || n < 8) {
    rows(0, n);
  } else {
    std::vector<std::future<void>> futs;
    const int chunk = (n + workers - 1) / workers;
    for (int j0 = 0; j0 < n; j0 += chunk) futs.push_back(std::async(std::launch::async, rows, j0, std::min(n, j0 + chunk)));
    for (auto& fu : futs) fu.get();
  }
  for (double g : gaps) f.max_gap = std::max(f.max_gap, g);
  return f;
}

std::vector<TrajectoryRay> verification_rays(const QuadraticDifferential& qd, const LevelFunction& lf,
                                             const Window& window, int count) {
  const Window inner = window.inflated(0.8);
  const double clearance = 0.05 * window.diagonal();
  std::vector<Complex> candidates;
  const int m = 7;
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      const Complex z{inner.x0 + (i + 0.37) * inner.width() / m, inner.y0 + (j + 0.61) * inner.height() / m};
      if (lf.masked(z)) continue;
      bool near = false;
      for (const CriticalPoint& cp : qd.critical_points())
        if (!cp.at.is_infinity() && std::abs(z - cp.at.value()) < clearance) near = true;
      if (!near) candidates.push_back(z);
    }
  }
  std::vector<TrajectoryRay> rays;
  if (candidates.empty() || count <= 0) return rays;
  const TraceOptions base = TraceOptions::defaults_for(qd);
  for (int k = 0; k < count; ++k) {
    const Complex z0 = candidates[static_cast<std::size_t>(k) * candidates.size() / count];
    TrajectoryRay ray = trace_horizontal(qd, z0, 1, base);
    if (ray.points.size() < 120 && ray.phi_length > 0) {
      TraceOptions fine = base;
      fine.max_step = ray.phi_length / 200.0;
      ray = trace_horizontal(qd, z0, 1, fine);
    }
    rays.push_back(std::move(ray));
  }
  return rays;
}

std::vector<std::vector<Complex>> contour_segments(const LevelField& field, double value) {
  std::vector<std::vector<Complex>> segs;
  const int n = field.n;
  auto usable = [&](int i, int j) { return !field.masked(i, j) && std::isfinite(field.at(i, j)); };
  auto cross = [&](int i0, int j0, int i1, int j1) {
    const double a = field.at(i0, j0) - value, b = field.at(i1, j1) - value;
    const Complex za = field.sample_point(i0, j0), zb = field.sample_point(i1, j1);
    return za + (a / (a - b)) * (zb - za);
  };
  for (int j = 0; j + 1 < n; ++j) {
    for (int i = 0; i + 1 < n; ++i) {
      if (!usable(i, j) || !usable(i + 1, j) || !usable(i + 1, j + 1) || !usable(i, j + 1)) continue;
      const bool s0 = field.at(i, j) > value, s1 = field.at(i + 1, j) > value;
      const bool s2 = field.at(i + 1, j + 1) > value, s3 = field.at(i, j + 1) > value;
      std::vector<Complex> e;
      if (s0 != s1) e.push_back(cross(i, j, i + 1, j));
      if (s1 != s2) e.push_back(cross(i + 1, j, i + 1, j + 1));
      if (s2 != s3) e.push_back(cross(i + 1, j + 1, i, j + 1));
      if (s3 != s0) e.push_back(cross(i, j + 1, i, j));
      if (e.size() == 2) {
        segs.push_back({e[0], e[1]});
      } else if (e.size() == 4) {
        const double center =
            0.25 * (field.at(i, j) + field.at(i + 1, j) + field.at(i + 1, j + 1) + field.at(i, j + 1));
        if ((center > value) == s0) {
          segs.push_back({e[0], e[1]});
          segs.push_back({e[2], e[3]});
        } else {
          segs.push_back({e[0], e[3]});
          segs.push_back({e[1], e[2]});
        }
      }
    }
  }
  return segs;
}

VerificationReport verify_level(const LevelField& field, const std::vector<TrajectoryRay>& rays,
                                const LevelFunction& lf, double ray_tolerance) {
  VerificationReport rep;

  // (ii) constant along each ray.
  rep.constant_on_rays = true;
  for (const TrajectoryRay& ray : rays) {
    const std::size_t m = ray.points.size();
    const std::size_t want = std::min<std::size_t>(m, 200);
    std::vector<double> vals;
    for (std::size_t k = 0; k < want; ++k) {
      const std::size_t idx = want == 1 ? 0 : k * (m - 1) / (want - 1);
      const Complex z = ray.points[idx];
      if (lf.masked(z)) continue;
      vals.push_back(lf.evaluate_unchecked(z).value);
    }
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= std::max<std::size_t>(vals.size(), 1);
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    const double sd = vals.empty() ? 0.0 : std::sqrt(var / vals.size());
    const double spread = sd / (1.0 + std::abs(mean));
    rep.ray_spread.push_back(spread);
    rep.ray_samples.push_back(vals.size());
    if (vals.size() < 100 || !(spread <= ray_tolerance)) rep.constant_on_rays = false;
  }

  const int n = field.n;
  auto usable = [&](int i, int j) { return !field.masked(i, j) && std::isfinite(field.at(i, j)); };

  // (iii) no locally constant 2x2 block.
  for (int j = 0; j + 1 < n; ++j) {
    for (int i = 0; i + 1 < n; ++i) {
      if (!usable(i, j) || !usable(i + 1, j) || !usable(i, j + 1) || !usable(i + 1, j + 1)) continue;
      const double v[] = {field.at(i, j), field.at(i + 1, j), field.at(i, j + 1), field.at(i + 1, j + 1)};
      if (*std::max_element(v, v + 4) - *std::min_element(v, v + 4) <= 0.0) ++rep.constancy_alarms;
    }
  }
  rep.nonconstant = rep.constancy_alarms == 0;

  // (i) neighbouring samples differ by at most 4 h max|sqrt(p)/q| away from cuts.
  auto check = [&](int i0, int j0, int i1, int j1) {
    if (!usable(i0, j0) || !usable(i1, j1)) return;
    const Complex a = field.sample_point(i0, j0), b = field.sample_point(i1, j1);
    for (const auto& cut : field.cuts)
      if (segment_crosses(a, b, cut)) return;
    double bound = 0.0;
    for (int k = 0; k <= 4; ++k) bound = std::max(bound, lf.density(a + (b - a) * (k / 4.0)));
    bound *= 4.0 * std::abs(b - a);
    if (std::abs(field.at(i1, j1) - field.at(i0, j0)) > bound) ++rep.jump_violations;
  };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (i + 1 < n) check(i, j, i + 1, j);
      if (j + 1 < n) check(i, j, i, j + 1);
    }
  }
  rep.continuous = rep.jump_violations == 0;
  return rep;
}

}  // namespace qd
