#include <doctest.h>

#include <algorithm>
#include <map>

#include "qd/error.hpp"
#include "qd/qdiff.hpp"
#include "support.hpp"

using namespace qd;
using namespace qdtest;

namespace {

int order_sum(const QuadraticDifferential& qd) {
  int s = 0;
  for (const auto& cp : qd.critical_points()) s += cp.signed_order;
  return s;
}

const CriticalPoint* find_at(const QuadraticDifferential& qd, Complex z, double tol = 1e-8) {
  for (const auto& cp : qd.critical_points())
    if (!cp.at.is_infinity() && std::abs(cp.at.value() - z) < tol) return &cp;
  return nullptr;
}

const CriticalPoint* find_inf(const QuadraticDifferential& qd) {
  for (const auto& cp : qd.critical_points())
    if (cp.at.is_infinity()) return &cp;
  return nullptr;
}

}  // namespace

TEST_CASE("inventory of simple differentials") {
  const auto flat = qd_new(one(), one());
  REQUIRE(flat.critical_points().size() == 1);
  CHECK(find_inf(flat)->signed_order == -4);

  const auto seg = qd_new(Polynomial({1.0, 0.0, -1.0}), one());
  CHECK(find_at(seg, 1.0)->signed_order == 1);
  CHECK(find_at(seg, -1.0)->signed_order == 1);
  CHECK(find_inf(seg)->signed_order == -6);
  CHECK(find_at(seg, 1.0)->is_finite_critical());
  CHECK(find_inf(seg)->kind == CriticalKind::InfiniteCritical);

  const auto f1 = figure1_left();
  CHECK(f1.critical_points().size() == 4);
  CHECK(find_inf(f1) == nullptr);
  for (Complex z : {Complex(0.5), Complex(-0.5), Complex(1, 1), Complex(-1, -1)}) {
    REQUIRE(find_at(f1, z) != nullptr);
    CHECK(find_at(f1, z)->signed_order == -1);
  }
}

TEST_CASE("common factors cancel") {
  const auto qd = qd_new(Polynomial::from_roots(std::vector<Complex>{1.0, 2.0}), Polynomial({-1.0, 1.0}));
  CHECK(qd.numerator().degree() == 1);
  CHECK(qd.denominator().degree() == 0);
  CHECK(find_at(qd, 1.0) == nullptr);
  CHECK(find_at(qd, 2.0)->signed_order == 1);
  CHECK(find_inf(qd)->signed_order == -5);
}

TEST_CASE("invalid constructions") {
  CHECK_THROWS_AS(qd_new(one(), Polynomial()), Error);
  CHECK_THROWS_AS(qd_new(Polynomial(), one()), Error);
  try {
    qd_new(one(), Polynomial({0.0}));
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ZeroPolynomial);
  }
  CHECK_THROWS_AS(lemniscate_qd(Polynomial::constant(2.0), one()), Error);
}

TEST_CASE("property: signed orders sum to -4") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const int dp = static_cast<int>(rng() % 7), dq = static_cast<int>(rng() % 7);
    // Roots drawn with repeats so multiplicities above one occur.
    auto roots = [&](int d) {
      std::vector<Complex> r;
      while (static_cast<int>(r.size()) < d) {
        const Complex z = random_point(rng, 2.0);
        const int m = std::min<int>(d - static_cast<int>(r.size()), 1 + static_cast<int>(rng() % 3));
        for (int k = 0; k < m; ++k) r.push_back(z);
      }
      return r;
    };
    const auto rp = roots(dp), rq = roots(dq);
    const auto qd = qd_new(Polynomial::from_roots(rp, random_point(rng, 1.0) + 1.5), Polynomial::from_roots(rq));
    CHECK(order_sum(qd) == -4);
  }
}

TEST_CASE("double pole classes and quadratic residues") {
  const auto circ = inverse_square();
  const SpherePoint zero = SpherePoint::finite(0.0);
  CHECK(classify_double_pole(circ, zero) == DoublePoleKind::Circular);
  CHECK(classify_double_pole(circ, SpherePoint::infinity()) == DoublePoleKind::Circular);
  CHECK(std::abs(*find_at(circ, 0.0)->quadratic_residue - Complex(-1.0)) < 1e-12);
  CHECK(std::abs(*find_inf(circ)->quadratic_residue - Complex(-1.0)) < 1e-12);

  const auto radial = qd_new(one(), Polynomial({0.0, 0.0, 1.0}));
  CHECK(classify_double_pole(radial, zero) == DoublePoleKind::Radial);
  const auto spiral = qd_new(Polynomial::constant(Complex(1, 1)), Polynomial({0.0, 0.0, 1.0}));
  CHECK(classify_double_pole(spiral, zero) == DoublePoleKind::Spiral);

  // Residue of a shifted double pole with extra factors: c = lim (z-b)^2 phi.
  const auto qd = qd_new(Polynomial({3.0, 1.0}), Polynomial::from_roots(std::vector<Complex>{{1, 1}, {1, 1}, -2.0}));
  const Complex b{1, 1};
  const Complex want = (b + 3.0) / (b + 2.0);
  CHECK(std::abs(*find_at(qd, b)->quadratic_residue - want) < 1e-9);
  CHECK_THROWS_AS(classify_double_pole(qd, SpherePoint::finite(-2.0)), Error);
}

TEST_CASE("critical directions of phi = z") {
  const auto qd = qd_new(Polynomial({0.0, 1.0}), one());
  const CriticalPoint& cp = *find_at(qd, 0.0);
  const auto dirs = critical_directions(qd, cp);
  REQUIRE(dirs.size() == 3);
  std::vector<double> ang;
  for (Complex d : dirs) ang.push_back(std::fmod(std::arg(d) + 2 * kPi, 2 * kPi));
  std::sort(ang.begin(), ang.end());
  CHECK(std::abs(ang[0]) < 1e-9);
  CHECK(std::abs(ang[1] - 2 * kPi / 3) < 1e-9);
  CHECK(std::abs(ang[2] - 4 * kPi / 3) < 1e-9);
}

TEST_CASE("property: critical directions make phi dz^2 positive") {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 30; ++trial) {
    const auto zs = separated_points(rng, 3, 1.0, 0.5);
    const int m = 1 + static_cast<int>(rng() % 3);
    std::vector<Complex> r(static_cast<std::size_t>(m), zs[0]);
    r.push_back(zs[1]);
    const auto qd = qd_new(Polynomial::from_roots(r, random_point(rng, 1.0) + 2.0), Polynomial::from_roots(std::vector<Complex>{zs[2]}));
    const CriticalPoint& cp = *find_at(qd, zs[0], 1e-6);
    const auto dirs = critical_directions(qd, cp);
    CHECK(static_cast<int>(dirs.size()) == m + 2);
    for (Complex d : dirs) {
      const double eps = 1e-4;
      const Complex v = qd(zs[0] + eps * d) * d * d;
      CHECK(std::abs(std::arg(v)) < 1e-2);
    }
  }
}

TEST_CASE("branch continuation picks the nearer root") {
  CHECK(continue_sqrt(Complex(4.0), Complex(-1.0)) == Complex(-2.0));
  CHECK(continue_sqrt(Complex(-4.0), Complex(0.1, 1.0)) == Complex(0.0, 2.0));
  const auto qd = inverse_square();
  BranchState st;
  Complex w{};
  // Once around the double pole: sqrt(-1/z^2) = +-i/z is single valued.
  for (int k = 0; k <= 64; ++k) {
    auto [v, next] = sqrt_phi_step(qd, std::polar(1.0, 2 * kPi * k / 64), st);
    st = next;
    w = v;
  }
  CHECK(std::abs(w - st.last_sqrt) < 1e-15);
  CHECK(std::abs(std::abs(w) - 1.0) < 1e-12);
  auto [v0, s0] = sqrt_phi_step(qd, 1.0, BranchState{});
  CHECK(std::abs(w - v0) < 1e-12);
  CHECK_THROWS_AS(sqrt_phi_step(qd, 1e-9, BranchState{}), Error);
}

TEST_CASE("p over q squared forms") {
  const auto inferred = p_over_q_squared_form(inverse_square());
  REQUIRE(inferred);
  CHECK(inferred->q.degree() == 1);
  CHECK(std::abs(inferred->p(0.3) / (inferred->q(0.3) * inferred->q(0.3)) - inverse_square()(0.3)) < 1e-12);
  CHECK_FALSE(p_over_q_squared_form(figure1_left()));

  const auto built = qd_from_p_over_q_squared(Polynomial({1.0, 0.0, -1.0}), one(), -1);
  const auto form = p_over_q_squared_form(built);
  REQUIRE(form);
  CHECK(form->sign == 1);
  CHECK(std::abs(built(0.5) + 0.75) < 1e-14);
}

TEST_CASE("lemniscate and cauchy builders") {
  const auto lem = lemniscate_qd(Polynomial({-1.0, 0.0, 1.0}), one());
  // -(r'/r)^2 with r = z^2 - 1
  const Complex z{0.3, 0.4};
  const Complex rr = 2.0 * z / (z * z - 1.0);
  CHECK(std::abs(lem(z) + rr * rr) < 1e-12);
  CHECK(find_at(lem, 0.0)->signed_order == 2);
  CHECK(find_at(lem, 1.0)->signed_order == -2);
  CHECK(find_at(lem, -1.0)->signed_order == -2);
  CHECK(find_inf(lem)->signed_order == -2);
  CHECK(order_sum(lem) == -4);

  const auto cau = cauchy_qd(one(), Polynomial({0.0, -1.0}), one());
  CHECK(std::abs(cau(z) - (4.0 - z * z)) < 1e-12);
  CHECK(find_at(cau, 2.0)->signed_order == 1);
  CHECK(find_at(cau, -2.0)->signed_order == 1);
}

TEST_CASE("semicircle density and mass") {
  const auto cau = cauchy_qd(one(), Polynomial({0.0, -1.0}), one());
  std::vector<Complex> seg;
  for (int k = 0; k <= 400; ++k) seg.push_back(-2.0 + 4.0 * k / 400);
  const auto dens = measure_density(cau, seg);
  for (std::size_t k = 1; k + 1 < seg.size(); ++k) {
    const double x = seg[k].real();
    const double want = std::sqrt(4 - x * x) / (2 * kPi);
    CHECK(std::abs(dens[k] - want) < 1e-10);
  }
  CHECK(std::abs(measure_density_at(cau, seg, 0.0) - 1.0 / kPi) < 1e-12);
  CHECK(std::abs(measure_mass(cau, seg) - 1.0) < 1e-8);
}

TEST_CASE("infinity chart and scaling") {
  const auto qd = qd_new(Polynomial({1.0, 0.0, -1.0}), one());
  const InfinityChart ch = qd.infinity_chart(Complex(0.5, 0.0));
  const Complex u{0.2, 0.1};
  const Complex z = 0.5 + 1.0 / u;
  CHECK(std::abs(ch.num(u) / ch.den(u) - qd(z) / std::pow(u, 4)) < 1e-9 * std::abs(qd(z) / std::pow(u, 4)));
  const auto neg = qd.negated();
  CHECK(std::abs(neg(0.3) + qd(0.3)) < 1e-15);
  const auto sc = qd.scaled(Complex(0, 2));
  CHECK(std::abs(sc(0.3) - Complex(0, 2) * qd(0.3)) < 1e-14);
  // Orders and therefore the exact criteria do not move under scaling.
  std::map<int, int> a, b;
  for (const auto& cp : qd.critical_points()) ++a[cp.signed_order];
  for (const auto& cp : sc.critical_points()) ++b[cp.signed_order];
  CHECK(a == b);
}
