#include <doctest.h>

#include "qd/error.hpp"
#include "qd/tracer.hpp"
#include "support.hpp"

using namespace qd;
using namespace qdtest;

namespace {

std::size_t node_at(const QuadraticDifferential& qd, Complex z) {
  const auto& c = qd.critical_points();
  for (std::size_t i = 0; i < c.size(); ++i)
    if (!c[i].at.is_infinity() && std::abs(c[i].at.value() - z) < 1e-8) return i;
  FAIL("no critical point at the requested location");
  return 0;
}

}  // namespace

TEST_CASE("flat differential: straight ray to the window edge") {
  const auto qd = qd_new(one(), one());
  const TraceOptions o = TraceOptions::defaults_for(qd);
  const auto ray = trace_horizontal(qd, 0.0, 1, o);
  CHECK(ray.termination == Termination::EscapedWindow);
  CHECK(ray.imag_drift < 1e-9);
  for (Complex z : ray.points) CHECK(std::abs(z.imag()) < 1e-12);
  CHECK(ray.points.back().real() > 0);
  CHECK(std::abs(ray.phi_length - ray.points.back().real()) < 1e-9);
  const auto back = trace_horizontal(qd, 0.0, -1, o);
  CHECK(back.points.back().real() < 0);
  const auto vert = trace_vertical(qd, 0.0, 1, o);
  for (Complex z : vert.points) CHECK(std::abs(z.real()) < 1e-12);
}

TEST_CASE("circle domain: closes after 2 pi") {
  const auto qd = inverse_square();
  const auto ray = trace_horizontal(qd, 1.0, 1, TraceOptions::defaults_for(qd));
  CHECK(ray.termination == Termination::Closed);
  CHECK(std::abs(ray.phi_length - 2 * kPi) < 1e-4);
  for (Complex z : ray.points) CHECK(std::abs(std::abs(z) - 1.0) < 1e-7);
  // the polyline measure runs along chords, so compare with a fine midpoint sum over the same chords
  double chords = 0.0;
  for (std::size_t k = 0; k + 1 < ray.points.size(); ++k) {
    const Complex a = ray.points[k], d = (ray.points[k + 1] - a) / 200.0;
    for (int m = 0; m < 200; ++m) chords += std::abs(d) * std::sqrt(std::abs(qd(a + (m + 0.5) * d)));
  }
  CHECK(std::abs(phi_length_of(qd, ray.points) - chords) < 1e-6);
  CHECK(std::abs(phi_length_of(qd, ray.points) - 2 * kPi) < 1e-3);
  CHECK(imag_drift_of(qd, ray) < 1e-8);
  // Orthogonal trajectories are rays through the pole.
  const auto v = trace_vertical(qd, Complex(1, 1), 1, TraceOptions::defaults_for(qd));
  for (Complex z : v.points) CHECK(std::abs(std::arg(z) - kPi / 4) < 1e-7);
}

TEST_CASE("short trajectory of 1 - z^2 from a critical point") {
  const auto qd = qd_new(Polynomial({1.0, 0.0, -1.0}), one());
  const TraceOptions o = TraceOptions::defaults_for(qd);
  const std::size_t plus = node_at(qd, 1.0), minus = node_at(qd, -1.0);
  int hits = 0;
  for (int k = 0; k < 3; ++k) {
    const auto ray = trace_from_critical(qd, plus, k, o);
    CHECK(ray.source_point == plus);
    if (ray.termination == Termination::HitCritical && ray.hit_point == minus) {
      ++hits;
      // int_{-1}^{1} sqrt(1 - x^2) dx
      CHECK(std::abs(ray.phi_length - kPi / 2) < 1e-6);
      CHECK(ray.points.front() == Complex(1.0));
      CHECK(ray.points.back() == Complex(-1.0));
      CHECK(std::abs(phi_length_of(qd, ray) - kPi / 2) < 1e-6);
    }
  }
  CHECK(hits == 1);
  CHECK_THROWS_AS(trace_from_critical(qd, plus, 3, o), Error);
}

TEST_CASE("start inside the snap disk is rejected") {
  const auto qd = qd_new(Polynomial({1.0, 0.0, -1.0}), one());
  const TraceOptions o = TraceOptions::defaults_for(qd);
  try {
    trace_horizontal(qd, Complex(1.0 + 0.1 * o.snap_radius), 1, o);
    FAIL("expected StartTooClose");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::StartTooClose);
  }
}

TEST_CASE("options validation and defaults") {
  const auto qd = figure1_left();
  TraceOptions o = TraceOptions::defaults_for(qd);
  CHECK(o.max_phi_length == doctest::Approx(100 * std::abs(Complex(2, 2))));
  CHECK(o.snap_radius == doctest::Approx(1e-6 * std::abs(Complex(2, 2))));
  o.rk_tol = -1;
  CHECK_THROWS_AS(o.validate(), Error);
}

TEST_CASE("figure 1 left: drift stays small and the primitive is invariant") {
  const auto qd = figure1_left();
  TraceOptions o = TraceOptions::defaults_for(qd);
  o.max_phi_length = 50;
  const auto ray = trace_horizontal(qd, 1.0, 1, o);
  CHECK(ray.termination == Termination::PhiLengthBudget);
  CHECK(ray.imag_drift < 1e-5);
  CHECK(imag_drift_of(qd, ray) < 1e-5);
  // Two tolerances: the lengths travelled agree and both stay on the leaf.
  o.rk_tol = 1e-12;
  const auto fine = trace_horizontal(qd, 1.0, 1, o);
  CHECK(fine.imag_drift < 1e-6);
  CHECK(std::abs(fine.phi_length - ray.phi_length) < 1e-9);
}

TEST_CASE("phi = z: Im of (2/3) z^(3/2) is constant along rays") {
  const auto qd = qd_new(Polynomial({0.0, 1.0}), one());
  const TraceOptions o = TraceOptions::defaults_for(qd);
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    const Complex z0 = random_point(rng, 1.5);
    if (std::abs(z0) < 0.1) continue;
    for (int orient : {1, -1}) {
      const auto ray = trace_horizontal(qd, z0, orient, o);
      // z^(3/2) = z * sqrt(z) on the continued branch stored with the ray
      const double im0 = (2.0 / 3.0 * ray.points[0] * ray.sqrt_values[0]).imag();
      for (std::size_t k = 0; k < ray.points.size(); ++k) {
        if (ray.in_infinity_chart[k]) continue;
        const double im = (2.0 / 3.0 * ray.points[k] * ray.sqrt_values[k]).imag();
        CHECK(std::abs(im - im0) < 1e-7 * (1 + std::abs(im0)));
      }
    }
  }
}

TEST_CASE("near misses inside the snap disk keep going") {
  // The leaf through 0 passes within about 1e-7 of the pole at 1/2 and turns around it.
  const auto qd = figure1_left();
  TraceOptions o = TraceOptions::defaults_for(qd);
  o.max_phi_length = 30;
  o.snap_radius = 1e-5;
  const auto ray = trace_horizontal(qd, 0.0, 1, o);
  CHECK(ray.termination == Termination::PhiLengthBudget);
  bool reported = false;
  for (const auto& d : ray.diagnostics) reported = reported || d.find("near miss") != std::string::npos;
  CHECK(reported);
  CHECK(ray.imag_drift < 1e-7);
}

TEST_CASE("property: random differentials keep the horizontal invariant") {
  std::mt19937_64 rng(42);
  int traced = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const int dp = static_cast<int>(rng() % 4), dq = static_cast<int>(rng() % 4);
    const auto zs = separated_points(rng, dp + dq, 1.5, 0.3);
    const std::vector<Complex> rp(zs.begin(), zs.begin() + dp), rq(zs.begin() + dp, zs.end());
    const auto qd = qd_new(Polynomial::from_roots(rp, random_point(rng, 1.0) + 1.2), Polynomial::from_roots(rq));
    TraceOptions o = TraceOptions::defaults_for(qd);
    o.max_phi_length = 20;
    const Complex z0 = random_point(rng, 1.5);
    bool clear = true;
    for (const Complex z : zs) clear = clear && std::abs(z - z0) > 0.05;
    if (!clear) continue;
    const auto ray = trace_horizontal(qd, z0, 1, o);
    ++traced;
    CHECK(ray.imag_drift < 1e-6);
    CHECK(ray.taus.size() == ray.points.size());
    CHECK(std::is_sorted(ray.taus.begin(), ray.taus.end()));
  }
  CHECK(traced > 20);
}

TEST_CASE("step budget terminates") {
  const auto qd = figure1_left();
  TraceOptions o = TraceOptions::defaults_for(qd);
  o.max_steps = 50;
  const auto ray = trace_horizontal(qd, 1.0, 1, o);
  CHECK(ray.termination == Termination::StepBudget);
}

TEST_CASE("termination names") {
  CHECK(std::string(to_string(Termination::Closed)) == "Closed");
  CHECK(std::string(to_string(Termination::EscapedWindow)) == "EscapedWindow");
}
