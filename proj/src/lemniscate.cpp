#include "qd/lemniscate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <unordered_map>

#include "qd/error.hpp"
#include "qd/kernels.hpp"

namespace qd {

namespace {

struct SignedRoot {
  Complex at;
  int m;
};

// Numerator of sum m_a / (z - a) over the zeros (m > 0) and poles (m < 0) of r.
Polynomial log_derivative_numerator(const std::vector<SignedRoot>& roots) {
  Polynomial sum = Polynomial::constant(0.0);
  for (std::size_t a = 0; a < roots.size(); ++a) {
    Polynomial term = Polynomial::constant(static_cast<double>(roots[a].m));
    for (std::size_t b = 0; b < roots.size(); ++b)
      if (b != a) term = term * Polynomial({-roots[b].at, 1.0});
    sum = sum + term;
  }
  return sum;
}

double point_segment_distance(Complex p, Complex a, Complex b) {
  const Complex d = b - a;
  const double n = std::norm(d);
  if (n == 0.0) return std::abs(p - a);
  const double t = std::clamp(((p - a) * std::conj(d)).real() / n, 0.0, 1.0);
  return std::abs(a + t * d - p);
}

}  // namespace

LemniscateReport analyze_lemniscate(const Polynomial& p, const Polynomial& q, int samples, std::uint64_t seed) {
  if (samples < 0) throw Error(Errc::InvalidArgument, "sample count must be nonnegative");
  const QuadraticDifferential qd = lemniscate_qd(p, q);
  LemniscateReport rep;
  const double scale = length_scale(qd);

  std::vector<SignedRoot> roots;
  if (p.degree() >= 1)
    for (const RootCluster& rc : poly_roots(p)) roots.push_back({rc.location, rc.multiplicity});
  if (q.degree() >= 1)
    for (const RootCluster& rc : poly_roots(q)) roots.push_back({rc.location, -rc.multiplicity});
  const Polynomial s = log_derivative_numerator(roots);
  std::vector<RootCluster> s_roots;
  if (s.degree() >= 1) s_roots = poly_roots(s);

  auto r_abs = [&](Complex z) { return std::abs(p(z)) / std::abs(q(z)); };

  rep.critical_points_consistent = true;
  std::vector<bool> used(s_roots.size(), false);
  for (const CriticalPoint& cp : qd.critical_points()) {
    if (!cp.is_zero() || cp.at.is_infinity()) continue;
    LemniscatePoint lp;
    lp.at = cp.at.value();
    lp.order = cp.signed_order;
    lp.level = r_abs(lp.at);
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_k = s_roots.size();
    for (std::size_t k = 0; k < s_roots.size(); ++k) {
      const double d = std::abs(s_roots[k].location - lp.at);
      if (!used[k] && d < best) best = d, best_k = k;
    }
    lp.matched_distance = best;
    if (best_k == s_roots.size() || best > 1e-6 * scale || 2 * s_roots[best_k].multiplicity != lp.order) {
      rep.critical_points_consistent = false;
      rep.diagnostics.push_back("zero of phi without a matching zero of the logarithmic derivative");
    } else {
      used[best_k] = true;
    }
    rep.critical_levels.push_back(lp.level);
    rep.finite_critical_points.push_back(lp);
  }
  for (std::size_t k = 0; k < s_roots.size(); ++k) {
    if (!used[k]) {
      rep.critical_points_consistent = false;
      rep.diagnostics.push_back("zero of the logarithmic derivative missing from the critical points");
    }
  }

  rep.all_residues_negative = true;
  for (const CriticalPoint& cp : qd.critical_points()) {
    if (cp.signed_order != -2 || !cp.quadratic_residue) continue;
    const Complex c = *cp.quadratic_residue;
    LemniscatePole pole{cp.at, c, c.real() < 0 && std::abs(c.imag()) <= 1e-8 * std::abs(c)};
    if (!pole.negative) rep.all_residues_negative = false;
    rep.double_poles.push_back(pole);
  }

  // Strebel samples.
  TraceOptions opts = TraceOptions::defaults_for(qd);
  const Window box = opts.window.inflated(0.5);  // the critical bounding box scale, inflated 2x
  opts.window = opts.window.inflated(2.0);
  opts.max_phi_length *= 10.0;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(box.x0, box.x1), uy(box.y0, box.y1);
  const auto& crit = qd.critical_points();
  for (int k = 0; k < samples; ++k) {
    Complex z;
    for (int attempt = 0;; ++attempt) {
      z = {ux(rng), uy(rng)};
      bool clear = true;
      for (std::size_t i = 0; i < crit.size(); ++i) {
        if (crit[i].at.is_infinity()) continue;
        if (std::abs(z - crit[i].at.value()) <= 10.0 * qd.guard_radius(i)) clear = false;
      }
      if (clear || attempt > 1000) break;
    }
    const TrajectoryRay ray = trace_horizontal(qd, z, 1, opts);
    rep.strebel_samples.push_back({z, ray.termination == Termination::Closed, ray.termination, ray.phi_length});
  }
  return rep;
}

LevelCurve lemniscate_level_curve(const Polynomial& p, const Polynomial& q, double c, const Window& window, int n) {
  if (!(c > 0)) throw Error(Errc::InvalidArgument, "level must be positive");
  if (n < 2) throw Error(Errc::InvalidArgument, "grid needs at least 2 x 2 samples");
  if (!window.valid()) throw Error(Errc::InvalidArgument, "empty window");
  const QuadraticDifferential qd = lemniscate_qd(p, q);

  const std::size_t total = static_cast<std::size_t>(n) * n;
  const double dx = window.width() / (n - 1), dy = window.height() / (n - 1);
  std::vector<Complex> nodes(total);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) nodes[static_cast<std::size_t>(j) * n + i] = {window.x0 + i * dx, window.y0 + j * dy};
  const std::vector<Complex> pv = p.eval_many(nodes), qv = q.eval_many(nodes);
  std::vector<double> pre(total), pim(total), qre(total), qim(total), f(total);
  for (std::size_t k = 0; k < total; ++k) {
    pre[k] = pv[k].real(), pim[k] = pv[k].imag();
    qre[k] = qv[k].real(), qim[k] = qv[k].imag();
  }
  simd::level_residual(pre, pim, qre, qim, c, f);
  auto val = [&](int i, int j) { return f[static_cast<std::size_t>(j) * n + i]; };

  // Edge keys: 2 * node + 0 for the edge to the right, + 1 for the edge upward.
  auto hkey = [n](int i, int j) { return 2L * (static_cast<long>(j) * n + i); };
  auto vkey = [n](int i, int j) { return 2L * (static_cast<long>(j) * n + i) + 1; };
  std::unordered_map<long, Complex> edge_point;
  auto crossing = [&](long key, int i0, int j0, int i1, int j1) {
    if (!edge_point.count(key)) {
      const double a = val(i0, j0), b = val(i1, j1);
      const double t = a / (a - b);
      const Complex za = nodes[static_cast<std::size_t>(j0) * n + i0];
      const Complex zb = nodes[static_cast<std::size_t>(j1) * n + i1];
      edge_point[key] = za + t * (zb - za);
    }
    return key;
  };

  std::vector<std::pair<long, long>> segs;
  for (int j = 0; j + 1 < n; ++j) {
    for (int i = 0; i + 1 < n; ++i) {
      const bool s0 = val(i, j) > 0, s1 = val(i + 1, j) > 0, s2 = val(i + 1, j + 1) > 0, s3 = val(i, j + 1) > 0;
      std::vector<long> e;
      long bottom = -1, right = -1, top = -1, left = -1;
      if (s0 != s1) bottom = crossing(hkey(i, j), i, j, i + 1, j), e.push_back(bottom);
      if (s1 != s2) right = crossing(vkey(i + 1, j), i + 1, j, i + 1, j + 1), e.push_back(right);
      if (s2 != s3) top = crossing(hkey(i, j + 1), i, j + 1, i + 1, j + 1), e.push_back(top);
      if (s3 != s0) left = crossing(vkey(i, j), i, j, i, j + 1), e.push_back(left);
      if (e.size() == 2) {
        segs.emplace_back(e[0], e[1]);
      } else if (e.size() == 4) {
        const double center = 0.25 * (val(i, j) + val(i + 1, j) + val(i + 1, j + 1) + val(i, j + 1));
        if ((center > 0) == s0) {
          segs.emplace_back(bottom, right);
          segs.emplace_back(left, top);
        } else {
          segs.emplace_back(bottom, left);
          segs.emplace_back(right, top);
        }
      }
    }
  }
  if (segs.empty()) throw Error(Errc::EmptyLevel, "level curve does not meet the window");

  // Join segments into polylines through shared edge keys.
  std::unordered_map<long, std::vector<std::size_t>> by_key;
  for (std::size_t k = 0; k < segs.size(); ++k) {
    by_key[segs[k].first].push_back(k);
    by_key[segs[k].second].push_back(k);
  }
  std::vector<bool> done(segs.size(), false);
  auto walk = [&](std::size_t start, long from_key) {
    std::vector<long> keys{from_key};
    std::size_t cur = start;
    long at = from_key;
    while (true) {
      done[cur] = true;
      const long next = segs[cur].first == at ? segs[cur].second : segs[cur].first;
      keys.push_back(next);
      at = next;
      std::size_t follow = segs.size();
      for (std::size_t k : by_key[at])
        if (!done[k]) follow = k;
      if (follow == segs.size()) break;
      cur = follow;
    }
    return keys;
  };
  std::vector<std::vector<long>> chains;
  for (std::size_t k = 0; k < segs.size(); ++k) {
    if (done[k]) continue;
    for (const long key : {segs[k].first, segs[k].second}) {
      if (by_key[key].size() == 1) {
        chains.push_back(walk(k, key));
        break;
      }
    }
  }
  for (std::size_t k = 0; k < segs.size(); ++k)
    if (!done[k]) chains.push_back(walk(k, segs[k].first));

  // Newton projection onto log|r| = log c.
  const Polynomial dp = p.derivative(), dq = q.derivative();
  const double logc = std::log(c);
  const double cell = std::max(dx, dy);
  auto project = [&](Complex z) {
    Complex x = z;
    for (int it = 0; it < 8; ++it) {
      const Complex s = dp(x) / p(x) - dq(x) / q(x);
      const double g = std::log(std::abs(p(x)) / std::abs(q(x))) - logc;
      if (!std::isfinite(g) || std::abs(s) == 0.0) return z;
      const Complex step = g / s;
      x -= step;
      if (std::abs(x - z) > cell) return z;
      if (std::abs(step) <= 1e-15 * (1 + std::abs(x))) break;
    }
    return x;
  };

  LevelCurve out;
  for (const auto& keys : chains) {
    std::vector<Complex> poly;
    poly.reserve(keys.size());
    for (long key : keys) poly.push_back(project(edge_point.at(key)));
    out.polylines.push_back(std::move(poly));
  }

  // Cross-check with traced trajectories through five curve points.
  std::vector<Complex> all;
  for (const auto& poly : out.polylines) all.insert(all.end(), poly.begin(), poly.end());
  TraceOptions opts = TraceOptions::defaults_for(qd);
  opts.window = opts.window.inflated(2.0);
  opts.max_phi_length *= 10.0;
  const Window inner = window.inflated(1.0 - 2.0 / n);
  const auto& crit = qd.critical_points();
  const std::size_t want = 5;
  for (std::size_t k = 0; k < all.size() && out.traced_checks < static_cast<int>(want); k += std::max<std::size_t>(1, all.size() / want)) {
    const Complex z0 = all[k];
    if (!inner.contains(z0)) continue;
    bool near_critical = false;
    for (std::size_t i = 0; i < crit.size(); ++i)
      if (!crit[i].at.is_infinity() && std::abs(z0 - crit[i].at.value()) <= 10.0 * qd.guard_radius(i)) near_critical = true;
    if (near_critical) continue;
    const TrajectoryRay ray = trace_horizontal(qd, z0, 1, opts);
    ++out.traced_checks;
    for (const Complex z : ray.points) {
      if (!inner.contains(z)) continue;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& poly : out.polylines) {
        if (poly.size() == 1) best = std::min(best, std::abs(z - poly[0]));
        for (std::size_t i = 0; i + 1 < poly.size(); ++i) best = std::min(best, point_segment_distance(z, poly[i], poly[i + 1]));
      }
      out.max_deviation = std::max(out.max_deviation, best);
    }
  }
  return out;
}

}  // namespace qd
