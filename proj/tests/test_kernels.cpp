#include <doctest.h>

#include "qd/kernels.hpp"
#include "qd/polyalg.hpp"
#include "support.hpp"

using namespace qd;
using namespace qdtest;
namespace simd = qd::simd;

namespace {

struct Batch {
  std::vector<double> cr, ci, xr, xi;
};

Batch make_batch(std::mt19937_64& rng, int degree, std::size_t n) {
  Batch b;
  std::normal_distribution<double> g(0.0, 1.0);
  for (int k = 0; k <= degree; ++k) b.cr.push_back(g(rng)), b.ci.push_back(g(rng));
  for (std::size_t i = 0; i < n; ++i) {
    const Complex z = random_point(rng, 1.3);
    b.xr.push_back(z.real()), b.xi.push_back(z.imag());
  }
  return b;
}

}  // namespace

TEST_CASE("scalar kernel matches naive evaluation") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const int deg = static_cast<int>(rng() % 65);
    const std::size_t n = rng() % 40;
    Batch b = make_batch(rng, deg, n);
    std::vector<double> orr(n), oi(n);
    simd::horner_scalar({b.cr, b.ci, b.xr, b.xi, orr, oi});
    std::vector<Complex> c;
    for (int k = 0; k <= deg; ++k) c.push_back({b.cr[k], b.ci[k]});
    const Polynomial p(c);
    for (std::size_t i = 0; i < n; ++i) {
      const Complex z{b.xr[i], b.xi[i]};
      CHECK(std::abs(Complex(orr[i], oi[i]) - naive_eval(p, z)) <= 1e-11 * p.abs_eval(std::abs(z)));
    }
  }
}

#if defined(QD_WITH_AVX2)
TEST_CASE("avx2 horner agrees with the scalar reference") {
  if (simd::detected_isa() != simd::Isa::Avx2) {
    MESSAGE("CPU lacks AVX2; equivalence test skipped");
    return;
  }
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 300; ++trial) {
    const int deg = static_cast<int>(rng() % 65);
    const std::size_t n = rng() % 37;  // exercises the non-multiple-of-4 tail
    Batch b = make_batch(rng, deg, n);
    std::vector<double> sr(n), si(n), vr(n), vi(n);
    simd::horner_scalar({b.cr, b.ci, b.xr, b.xi, sr, si});
    simd::horner_avx2({b.cr, b.ci, b.xr, b.xi, vr, vi});
    double scale = 0;
    for (int k = 0; k <= deg; ++k) scale += std::hypot(b.cr[k], b.ci[k]) * std::pow(1.9, k);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(sr[i] - vr[i]) <= 1e-13 * scale);
      CHECK(std::abs(si[i] - vi[i]) <= 1e-13 * scale);
    }
  }
}

TEST_CASE("avx2 level residual agrees with the scalar reference") {
  if (simd::detected_isa() != simd::Isa::Avx2) return;
  std::mt19937_64 rng(23);
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 17u, 64u}) {
    std::vector<double> pr(n), pi(n), qr(n), qi(n), a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) pr[i] = g(rng), pi[i] = g(rng), qr[i] = g(rng), qi[i] = g(rng);
    simd::level_residual_scalar(pr, pi, qr, qi, 1.7, a);
    simd::level_residual_avx2(pr, pi, qr, qi, 1.7, b);
    for (std::size_t i = 0; i < n; ++i) {
      const double want = pr[i] * pr[i] + pi[i] * pi[i] - 1.7 * 1.7 * (qr[i] * qr[i] + qi[i] * qi[i]);
      CHECK(a[i] == doctest::Approx(want).epsilon(1e-14));
      CHECK(std::abs(a[i] - b[i]) <= 1e-14 * (1 + std::abs(want)));
    }
  }
}
#endif

TEST_CASE("dispatcher honors forced isa and eval_many matches pointwise evaluation") {
  std::mt19937_64 rng(24);
  const Polynomial p = random_poly(rng, 12);
  std::vector<Complex> zs;
  for (int i = 0; i < 29; ++i) zs.push_back(random_point(rng, 1.2));
  for (simd::Isa isa : {simd::Isa::Scalar, simd::Isa::Avx2}) {
    simd::force_isa(isa);
    if (isa == simd::Isa::Avx2 && simd::detected_isa() != simd::Isa::Avx2) {
      CHECK(simd::active_isa() == simd::Isa::Scalar);
    } else {
      CHECK(simd::active_isa() == isa);
    }
    const auto vals = p.eval_many(zs);
    for (std::size_t i = 0; i < zs.size(); ++i)
      CHECK(std::abs(vals[i] - p(zs[i])) <= 1e-13 * p.abs_eval(std::abs(zs[i])));
  }
  simd::force_isa(simd::detected_isa());
  CHECK(std::string(simd::isa_name(simd::Isa::Scalar)) == "scalar");
}
