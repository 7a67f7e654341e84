#include "qd/cauchy.hpp"

#include <cmath>

#include "qd/error.hpp"

namespace qd {

CauchyReport analyze_cauchy(const Polynomial& p, const Polynomial& q, const Polynomial& r) {
  const QuadraticDifferential qd = cauchy_qd(p, q, r);
  const CriticalGraph g = build_critical_graph(qd);
  CauchyReport rep;
  rep.unresolved_rays = g.unresolved.size();
  for (const CriticalEdge& e : g.edges) {
    if (!e.is_short) continue;
    CauchyComponent c;
    c.from_node = e.from_node;
    c.to_node = e.to_node;
    c.polyline = e.polyline;
    try {
      c.mass = measure_mass(qd, c.polyline);
      const std::vector<Complex> dens = measure_density(qd, c.polyline);
      double peak = 0.0;
      for (const Complex d : dens) peak = std::max(peak, std::abs(d));
      c.nonnegative = c.mass.real() >= 0 && std::abs(c.mass.imag()) <= 1e-8 * std::max(1.0, std::abs(c.mass));
      for (const Complex d : dens)
        if (d.real() < -1e-8 * peak || std::abs(d.imag()) > 1e-8 * peak) c.nonnegative = false;
      if (!c.nonnegative) c.note = "density is not real and nonnegative along this trajectory";
    } catch (const Error& err) {
      c.note = err.what();
    }
    rep.total_mass += c.mass;
    rep.components.push_back(std::move(c));
  }
  if (rep.components.empty()) throw Error(Errc::NoShortTrajectory, "no short trajectory carries the measure");
  return rep;
}

}  // namespace qd
