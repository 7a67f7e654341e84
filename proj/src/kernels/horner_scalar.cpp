#include "qd/kernels.hpp"

namespace qd::simd {

void horner_scalar(const HornerArgs& a) noexcept {
  const std::size_t n = a.x_re.size();
  const std::size_t m = a.c_re.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = a.x_re[i], xi = a.x_im[i];
    double vr = 0.0, vi = 0.0;
    for (std::size_t k = m; k-- > 0;) {
      const double tr = vr * xr - vi * xi + a.c_re[k];
      const double ti = vr * xi + vi * xr + a.c_im[k];
      vr = tr;
      vi = ti;
    }
    a.out_re[i] = vr;
    a.out_im[i] = vi;
  }
}

void level_residual_scalar(std::span<const double> p_re, std::span<const double> p_im,
                           std::span<const double> q_re, std::span<const double> q_im,
                           double level, std::span<double> out) noexcept {
  const double c2 = level * level;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (p_re[i] * p_re[i] + p_im[i] * p_im[i]) - c2 * (q_re[i] * q_re[i] + q_im[i] * q_im[i]);
  }
}

}  // namespace qd::simd
