#include <immintrin.h>

#include "qd/kernels.hpp"

namespace qd::simd {

void horner_avx2(const HornerArgs& a) noexcept {
  const std::size_t n = a.x_re.size();
  const std::size_t m = a.c_re.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xr = _mm256_loadu_pd(a.x_re.data() + i);
    const __m256d xi = _mm256_loadu_pd(a.x_im.data() + i);
    __m256d vr = _mm256_setzero_pd();
    __m256d vi = _mm256_setzero_pd();
    for (std::size_t k = m; k-- > 0;) {
      const __m256d cr = _mm256_set1_pd(a.c_re[k]);
      const __m256d ci = _mm256_set1_pd(a.c_im[k]);
      // (vr + i vi)(xr + i xi) + c
      const __m256d tr = _mm256_fmadd_pd(vr, xr, _mm256_fnmadd_pd(vi, xi, cr));
      const __m256d ti = _mm256_fmadd_pd(vr, xi, _mm256_fmadd_pd(vi, xr, ci));
      vr = tr;
      vi = ti;
    }
    _mm256_storeu_pd(a.out_re.data() + i, vr);
    _mm256_storeu_pd(a.out_im.data() + i, vi);
  }
  if (i < n) {
    HornerArgs tail{a.c_re,
                    a.c_im,
                    a.x_re.subspan(i),
                    a.x_im.subspan(i),
                    a.out_re.subspan(i),
                    a.out_im.subspan(i)};
    horner_scalar(tail);
  }
}

void level_residual_avx2(std::span<const double> p_re, std::span<const double> p_im,
                         std::span<const double> q_re, std::span<const double> q_im,
                         double level, std::span<double> out) noexcept {
  const std::size_t n = out.size();
  const __m256d c2 = _mm256_set1_pd(level * level);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d pr = _mm256_loadu_pd(p_re.data() + i);
    const __m256d pi = _mm256_loadu_pd(p_im.data() + i);
    const __m256d qr = _mm256_loadu_pd(q_re.data() + i);
    const __m256d qi = _mm256_loadu_pd(q_im.data() + i);
    const __m256d pp = _mm256_fmadd_pd(pr, pr, _mm256_mul_pd(pi, pi));
    const __m256d qq = _mm256_fmadd_pd(qr, qr, _mm256_mul_pd(qi, qi));
    _mm256_storeu_pd(out.data() + i, _mm256_fnmadd_pd(c2, qq, pp));
  }
  if (i < n) {
    level_residual_scalar(p_re.subspan(i), p_im.subspan(i), q_re.subspan(i), q_im.subspan(i),
                          level, out.subspan(i));
  }
}

}  // namespace qd::simd
