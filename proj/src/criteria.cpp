#include "qd/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qd/error.hpp"

namespace qd {

using nlohmann::json;

const char* to_string(Criterion c) noexcept {
  switch (c) {
    case Criterion::ThreePole: return "ThreePole";
    case Criterion::OddMultiplicity: return "OddMultiplicity";
    case Criterion::NoShortTrajectory: return "NoShortTrajectory";
    case Criterion::ParityPairs: return "ParityPairs";
    case Criterion::ResidueCriterion: return "ResidueCriterion";
  }
  return "?";
}

const char* to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::CertifiedNoRecurrence: return "CertifiedNoRecurrence";
    case Verdict::NumericallySupported: return "NumericallySupported";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

int strength(Verdict v) noexcept {
  switch (v) {
    case Verdict::CertifiedNoRecurrence: return 2;
    case Verdict::NumericallySupported: return 1;
    case Verdict::Inconclusive: return 0;
  }
  return 0;
}

namespace {

json location_json(const SpherePoint& p) {
  if (p.is_infinity()) return "inf";
  return json::array({p.value().real(), p.value().imag()});
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

json point_json(const CriticalPoint& cp) { return {{"at", location_json(cp.at)}, {"order", cp.signed_order}}; }

json pairing_json(const PairingResult& pr) {
  json j;
  if (const auto* p = std::get_if<Pairing>(&pr)) {
    j["complete"] = true;
    j["pairs"] = p->pairs;
    j["heuristic"] = p->heuristic;
  } else {
    const auto& f = std::get<PairingFailure>(pr);
    j["complete"] = false;
    j["pairs"] = f.partial;
    j["unmatched"] = f.unmatched;
  }
  return j;
}

POverQSquared require_form(const QuadraticDifferential& qd) {
  auto f = p_over_q_squared_form(qd);
  if (!f) throw Error(Errc::WrongProvenance, "criterion needs phi in p/q^2 form");
  return *f;
}

}  // namespace

CriterionVerdict three_pole(const QuadraticDifferential& qd) {
  CriterionVerdict v{Criterion::ThreePole, Verdict::Inconclusive, json::object()};
  json poles = json::array();
  for (const CriticalPoint& cp : qd.critical_points())
    if (cp.is_pole()) poles.push_back(point_json(cp));
  v.evidence["poles"] = poles;
  v.evidence["distinct_poles"] = poles.size();
  if (poles.size() <= 3) v.verdict = Verdict::CertifiedNoRecurrence;
  return v;
}

CriterionVerdict odd_multiplicity(const QuadraticDifferential& qd) {
  CriterionVerdict v{Criterion::OddMultiplicity, Verdict::Inconclusive, json::object()};
  json odd = json::array();
  for (const CriticalPoint& cp : qd.critical_points())
    if (std::abs(cp.signed_order) % 2 == 1) odd.push_back(point_json(cp));
  v.evidence["odd_points"] = odd;
  v.evidence["odd_count"] = odd.size();
  if (odd.size() <= 3) v.verdict = Verdict::CertifiedNoRecurrence;
  return v;
}

CriterionVerdict no_short_trajectory_criterion(const QuadraticDifferential& qd, const CriticalGraph& graph) {
  CriterionVerdict v{Criterion::NoShortTrajectory, Verdict::Inconclusive, json::object()};
  std::size_t infinite = 0;
  for (const CriticalPoint& cp : qd.critical_points())
    if (!cp.is_finite_critical()) ++infinite;
  std::size_t shorts = 0;
  for (const CriticalEdge& e : graph.edges)
    if (e.is_short) ++shorts;
  v.evidence["infinite_critical_points"] = infinite;
  v.evidence["short_edges"] = shorts;
  v.evidence["unresolved_rays"] = graph.unresolved.size();
  if (infinite >= 1 && shorts == 0 && graph.unresolved.empty()) v.verdict = Verdict::NumericallySupported;
  return v;
}

CriterionVerdict parity_pairs(const QuadraticDifferential& qd, const PairingResult& pairing) {
  require_form(qd);
  CriterionVerdict v{Criterion::ParityPairs, Verdict::Inconclusive, json::object()};
  v.evidence["pairing"] = pairing_json(pairing);
  const auto* p = std::get_if<Pairing>(&pairing);
  if (!p) return v;
  const auto& nodes = qd.critical_points();
  bool ok = true;
  json mults = json::array();
  for (const auto& [a, b] : p->pairs) {
    const int ma = nodes[a].signed_order, mb = nodes[b].signed_order;
    mults.push_back({ma, mb});
    if ((ma - mb) % 2 != 0) ok = false;
  }
  v.evidence["multiplicities"] = mults;
  if (ok) v.verdict = Verdict::NumericallySupported;
  return v;
}

CriterionVerdict residue_criterion(const QuadraticDifferential& qd, const PairingResult& pairing) {
  const POverQSquared form = require_form(qd);
  CriterionVerdict v{Criterion::ResidueCriterion, Verdict::Inconclusive, json::object()};
  v.evidence["pairing"] = pairing_json(pairing);
  v.evidence["tolerance"] = 1e-8;
  bool ok = true;
  json residues = json::array();
  if (form.q.degree() >= 1) {
    const Polynomial dq = form.q.derivative();
    for (const RootCluster& rc : poly_roots(form.q)) {
      if (rc.multiplicity > 1) {
        residues.push_back({{"at", complex_json(rc.location)}, {"note", "pole of q of higher order"}});
        ok = false;
        continue;
      }
      const Complex res = std::sqrt(form.p(rc.location)) / dq(rc.location);
      bool imaginary = true;
      for (const double sgn : {1.0, -1.0}) {
        const Complex r = sgn * res;
        if (std::abs(r.real()) > 1e-8 * std::abs(r)) imaginary = false;
      }
      residues.push_back({{"at", complex_json(rc.location)}, {"residue", complex_json(res)}, {"imaginary", imaginary}});
      if (!imaginary) ok = false;
    }
  }
  v.evidence["residues"] = residues;
  if (ok && std::holds_alternative<Pairing>(pairing)) v.verdict = Verdict::NumericallySupported;
  return v;
}

std::vector<CriterionVerdict> run_all(const QuadraticDifferential& qd) { return run_all(qd, build_critical_graph(qd)); }

std::vector<CriterionVerdict> run_all(const QuadraticDifferential& qd, const CriticalGraph& graph) {
  std::vector<CriterionVerdict> out;
  out.push_back(three_pole(qd));
  out.push_back(odd_multiplicity(qd));
  out.push_back(no_short_trajectory_criterion(qd, graph));
  if (p_over_q_squared_form(qd)) {
    const PairingResult pairing = pair_zeros_by_short_trajectories(qd, graph);
    out.push_back(parity_pairs(qd, pairing));
    out.push_back(residue_criterion(qd, pairing));
  } else {
    for (const Criterion c : {Criterion::ParityPairs, Criterion::ResidueCriterion}) {
      out.push_back({c, Verdict::Inconclusive, {{"applicable", false}, {"reason", "phi has no p/q^2 form"}}});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const CriterionVerdict& a, const CriterionVerdict& b) {
    return strength(a.verdict) > strength(b.verdict);
  });
  return out;
}

Verdict overall(const std::vector<CriterionVerdict>& verdicts) noexcept {
  Verdict best = Verdict::Inconclusive;
  for (const CriterionVerdict& v : verdicts)
    if (strength(v.verdict) > strength(best)) best = v.verdict;
  return best;
}

namespace {

std::int64_t narrow(__int128 v) {
  if (v > INT64_MAX || v < INT64_MIN) throw Error(Errc::InvalidArgument, "rational overflow");
  return static_cast<std::int64_t>(v);
}

Rational make(__int128 n, __int128 d) {
  if (d == 0) throw Error(Errc::InvalidArgument, "zero denominator");
  if (d < 0) n = -n, d = -d;
  __int128 a = n < 0 ? -n : n, b = d;
  while (b != 0) {
    const __int128 t = a % b;
    a = b;
    b = t;
  }
  if (a > 1) n /= a, d /= a;
  return Rational(narrow(n), narrow(d));
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
  if (den == 0) throw Error(Errc::InvalidArgument, "zero denominator");
  if (den_ < 0) num_ = -num_, den_ = -den_;
  const std::int64_t g = std::gcd(num_, den_);
  if (g > 1) num_ /= g, den_ /= g;
}

std::string Rational::str() const {
  return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
}

Rational operator+(const Rational& a, const Rational& b) {
  return make(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
              static_cast<__int128>(a.den_) * b.den_);
}

Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }

Rational operator*(const Rational& a, const Rational& b) {
  return make(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
}

bool operator<(const Rational& a, const Rational& b) {
  return static_cast<__int128>(a.num_) * b.den_ < static_cast<__int128>(b.num_) * a.den_;
}

Rational teichmuller_check(const QdPolygon& polygon) {
  Rational lhs(0);
  for (const PolygonVertex& v : polygon.vertices) {
    if (!(Rational(0) < v.angle_over_pi) || Rational(2) < v.angle_over_pi) {
      throw Error(Errc::InvalidArgument, "polygon angle must lie in (0, 2 pi]");
    }
    lhs = lhs + Rational(1) - Rational(v.order + 2, 2) * v.angle_over_pi;
  }
  Rational rhs(2);
  for (const int m : polygon.interior_orders) rhs = rhs + Rational(m);
  return lhs - rhs;
}

}  // namespace qd
