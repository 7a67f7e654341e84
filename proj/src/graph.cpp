#include "qd/graph.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <limits>

#include "qd/error.hpp"

namespace qd {

namespace {

double cross(Complex a, Complex b) { return a.real() * b.imag() - a.imag() * b.real(); }

double point_segment_distance(Complex p, Complex a, Complex b) {
  const Complex d = b - a;
  const double n = std::norm(d);
  if (n == 0.0) return std::abs(p - a);
  const double t = std::clamp(((p - a) * std::conj(d)).real() / n, 0.0, 1.0);
  return std::abs(a + t * d - p);
}

double point_polyline_distance(Complex p, const std::vector<Complex>& poly) {
  if (poly.size() == 1) return std::abs(p - poly.front());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < poly.size(); ++i) best = std::min(best, point_segment_distance(p, poly[i], poly[i + 1]));
  return best;
}

Complex polyline_midpoint(const std::vector<Complex>& poly) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < poly.size(); ++i) total += std::abs(poly[i + 1] - poly[i]);
  double run = 0.0;
  for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
    const double seg = std::abs(poly[i + 1] - poly[i]);
    if (run + seg >= 0.5 * total && seg > 0) return poly[i] + (0.5 * total - run) / seg * (poly[i + 1] - poly[i]);
    run += seg;
  }
  return poly.empty() ? Complex{} : poly.back();
}

bool same_endpoints(const CriticalEdge& a, const CriticalEdge& b) {
  return (a.from_node == b.from_node && a.to_node == b.to_node) ||
         (a.from_node == b.to_node && a.to_node == b.from_node);
}

struct Launch {
  std::size_t node;
  int direction;
  TrajectoryRay ray;
};

std::vector<Launch> launch_from(const QuadraticDifferential& qd, std::size_t node, const TraceOptions& opts) {
  const CriticalPoint& cp = qd.critical_points()[node];
  std::vector<Launch> out;
  const int count = cp.signed_order + 2;
  for (int k = 0; k < count; ++k) out.push_back({node, k, trace_from_critical(qd, node, k, opts)});
  return out;
}

}  // namespace

std::vector<CriticalEdge> CriticalGraph::short_edges() const {
  std::vector<CriticalEdge> out;
  for (const CriticalEdge& e : edges)
    if (e.is_short) out.push_back(e);
  return out;
}

GraphOptions GraphOptions::defaults_for(const QuadraticDifferential& qd) {
  GraphOptions g;
  g.trace = TraceOptions::defaults_for(qd);
  g.dedup_tolerance = 1e-3 * length_scale(qd);
  return g;
}

CriticalGraph build_critical_graph(const QuadraticDifferential& qd) {
  return build_critical_graph(qd, GraphOptions::defaults_for(qd));
}

CriticalGraph build_critical_graph(const QuadraticDifferential& qd, const GraphOptions& opts) {
  opts.trace.validate();
  CriticalGraph g;
  g.nodes = qd.critical_points();

  std::vector<std::size_t> sources;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    if (g.nodes[i].is_finite_critical() && !g.nodes[i].at.is_infinity()) sources.push_back(i);
  }

  std::vector<std::vector<Launch>> batches(sources.size());
  if (opts.parallel && sources.size() > 1) {
    std::vector<std::future<std::vector<Launch>>> futs;
    futs.reserve(sources.size());
    for (std::size_t s : sources) {
      futs.push_back(std::async(std::launch::async, launch_from, std::cref(qd), s, std::cref(opts.trace)));
    }
    for (std::size_t i = 0; i < futs.size(); ++i) batches[i] = futs[i].get();
  } else {
    for (std::size_t i = 0; i < sources.size(); ++i) batches[i] = launch_from(qd, sources[i], opts.trace);
  }

  const std::optional<std::size_t> inf = qd.infinity_index();
  for (auto& batch : batches) {
    for (Launch& l : batch) {
      ++g.launches;
      TrajectoryRay& ray = l.ray;
      for (const std::string& d : ray.diagnostics) g.diagnostics.push_back(d);
      CriticalEdge e;
      e.from_node = l.node;
      e.direction_index = l.direction;
      e.polyline = ray.points;
      e.phi_length = ray.phi_length;
      e.termination = ray.termination;
      e.imag_drift = ray.imag_drift;
      switch (ray.termination) {
        case Termination::HitCritical:
          e.to_node = *ray.hit_point;
          e.is_short = g.nodes[e.to_node].is_finite_critical() && std::isfinite(e.phi_length);
          break;
        case Termination::Closed:
          e.to_node = l.node;
          e.is_short = true;
          break;
        case Termination::EscapedWindow:
          if (!inf) {
            g.diagnostics.push_back("ray escaped the window with no critical point at infinity");
            g.unresolved.push_back(std::move(ray));
            continue;
          }
          e.to_node = *inf;
          e.is_short = false;
          break;
        case Termination::PhiLengthBudget:
        case Termination::StepBudget:
          g.unresolved.push_back(std::move(ray));
          continue;
      }
      if (e.is_short) {
        const Complex mid = polyline_midpoint(e.polyline);
        bool duplicate = false;
        for (const CriticalEdge& f : g.edges) {
          if (f.is_short && same_endpoints(e, f) && point_polyline_distance(mid, f.polyline) <= opts.dedup_tolerance) {
            duplicate = true;
            break;
          }
        }
        if (duplicate) continue;
      }
      g.edges.push_back(std::move(e));
    }
  }
  return g;
}

std::vector<CriticalEdge> find_short_trajectories(const QuadraticDifferential& qd, const GraphOptions& opts) {
  return build_critical_graph(qd, opts).short_edges();
}

std::vector<CriticalEdge> find_short_trajectories(const QuadraticDifferential& qd) {
  return find_short_trajectories(qd, GraphOptions::defaults_for(qd));
}

namespace {

using Adjacency = std::vector<std::vector<bool>>;

bool exhaustive_match(std::vector<std::size_t>& left, const Adjacency& adj,
                      std::vector<std::pair<std::size_t, std::size_t>>& out) {
  if (left.empty()) return true;
  const std::size_t a = left.front();
  for (std::size_t j = 1; j < left.size(); ++j) {
    const std::size_t b = left[j];
    if (!adj[a][b]) continue;
    std::vector<std::size_t> rest;
    for (std::size_t k = 1; k < left.size(); ++k)
      if (k != j) rest.push_back(left[k]);
    out.emplace_back(a, b);
    if (exhaustive_match(rest, adj, out)) return true;
    out.pop_back();
  }
  return false;
}

}  // namespace

PairingResult pair_zeros_by_short_trajectories(const QuadraticDifferential& qd) {
  return pair_zeros_by_short_trajectories(qd, build_critical_graph(qd));
}

PairingResult pair_zeros_by_short_trajectories(const QuadraticDifferential& qd, const CriticalGraph& graph) {
  if (!p_over_q_squared_form(qd)) throw Error(Errc::WrongProvenance, "pairing needs phi in p/q^2 form");
  const auto& nodes = qd.critical_points();
  std::vector<std::size_t> zeros;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].is_zero() && !nodes[i].at.is_infinity()) zeros.push_back(i);

  Adjacency adj(nodes.size(), std::vector<bool>(nodes.size(), false));
  for (const CriticalEdge& e : graph.edges) {
    if (!e.is_short || e.from_node == e.to_node) continue;
    if (!nodes[e.from_node].is_zero() || !nodes[e.to_node].is_zero()) continue;
    adj[e.from_node][e.to_node] = adj[e.to_node][e.from_node] = true;
  }

  // Greedy pass in node order.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<bool> used(nodes.size(), false);
  for (std::size_t a : zeros) {
    if (used[a]) continue;
    for (std::size_t b : zeros) {
      if (b != a && !used[b] && adj[a][b]) {
        used[a] = used[b] = true;
        pairs.emplace_back(a, b);
        break;
      }
    }
  }
  if (pairs.size() * 2 == zeros.size()) return Pairing{pairs, false};

  if (zeros.size() <= 10 && zeros.size() % 2 == 0) {
    std::vector<std::size_t> left = zeros;
    std::vector<std::pair<std::size_t, std::size_t>> exact;
    if (exhaustive_match(left, adj, exact)) return Pairing{exact, false};
  }
  PairingFailure f;
  f.partial = pairs;
  for (std::size_t z : zeros)
    if (!used[z]) f.unmatched.push_back(z);
  return f;
}

const char* to_string(RecurrenceVerdict v) noexcept {
  switch (v) {
    case RecurrenceVerdict::SuspectedRecurrent: return "SuspectedRecurrent";
    case RecurrenceVerdict::NotRecurrent: return "NotRecurrent";
    case RecurrenceVerdict::Undetermined: return "Undetermined";
  }
  return "?";
}

double default_transversal_halflength(const QuadraticDifferential& qd) { return 0.25 * length_scale(qd); }

int count_crossings(std::span<const Complex> a, std::span<const Complex> b) {
  int count = 0;
  for (std::size_t i = 0; i + 1 < a.size(); ++i) {
    const Complex p = a[i], r = a[i + 1] - a[i];
    const double ax0 = std::min(a[i].real(), a[i + 1].real()), ax1 = std::max(a[i].real(), a[i + 1].real());
    const double ay0 = std::min(a[i].imag(), a[i + 1].imag()), ay1 = std::max(a[i].imag(), a[i + 1].imag());
    for (std::size_t j = 0; j + 1 < b.size(); ++j) {
      const Complex q = b[j], s = b[j + 1] - b[j];
      if (std::max(b[j].real(), b[j + 1].real()) < ax0 || std::min(b[j].real(), b[j + 1].real()) > ax1) continue;
      if (std::max(b[j].imag(), b[j + 1].imag()) < ay0 || std::min(b[j].imag(), b[j + 1].imag()) > ay1) continue;
      const double denom = cross(r, s);
      // Near-parallel segments are tangencies, not crossings.
      if (std::abs(denom) <= 1e-6 * std::abs(r) * std::abs(s)) continue;
      const double t = cross(q - p, s) / denom;
      const double u = cross(q - p, r) / denom;
      if (t > 0.0 && t < 1.0 && u > 0.0 && u < 1.0) ++count;
    }
  }
  return count;
}

RecurrenceReport detect_recurrence(const QuadraticDifferential& qd, Complex z0, const TraceOptions& opts, int k_min,
                                   std::optional<double> transversal_halflength) {
  opts.validate();
  const double half = transversal_halflength.value_or(default_transversal_halflength(qd));
  if (!(half > 0)) throw Error(Errc::InvalidArgument, "transversal half-length must be positive");
  RecurrenceReport rep;

  TraceOptions t = opts;
  t.max_phi_length = half;
  const TrajectoryRay up = trace_vertical(qd, z0, 1, t);
  const TrajectoryRay down = trace_vertical(qd, z0, -1, t);
  rep.transversal.assign(down.points.rbegin(), down.points.rend());
  rep.transversal.insert(rep.transversal.end(), up.points.begin() + 1, up.points.end());

  rep.ray = trace_horizontal(qd, z0, 1, opts);
  const auto& pts = rep.ray.points;
  rep.closed = rep.ray.termination == Termination::Closed;
  // The ray starts (and, when closed, ends) on the transversal at z0.
  std::size_t first = 1;
  std::size_t last = pts.size();
  if (rep.closed && last > first + 1) --last;
  if (last > first + 1) {
    rep.crossings = count_crossings(std::span<const Complex>(pts.data() + first, last - first), rep.transversal);
  }

  switch (rep.ray.termination) {
    case Termination::Closed:
    case Termination::HitCritical:
    case Termination::EscapedWindow:
      rep.verdict = RecurrenceVerdict::NotRecurrent;
      rep.reason = rep.ray.termination;
      break;
    case Termination::PhiLengthBudget:
    case Termination::StepBudget:
      rep.verdict = rep.crossings >= k_min ? RecurrenceVerdict::SuspectedRecurrent : RecurrenceVerdict::Undetermined;
      break;
  }
  return rep;
}

}  // namespace qd
