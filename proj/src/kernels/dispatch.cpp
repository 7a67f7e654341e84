#include <atomic>
#include <cstdlib>
#include <cstring>

#include "qd/kernels.hpp"

namespace qd::simd {

namespace {

Isa env_or_detected() noexcept {
  const Isa best = detected_isa();
  if (const char* env = std::getenv("QD_SIMD")) {
    if (std::strcmp(env, "scalar") == 0) return Isa::Scalar;
    if (std::strcmp(env, "avx2") == 0) return best;
  }
  return best;
}

std::atomic<Isa>& active() noexcept {
  static std::atomic<Isa> isa{env_or_detected()};
  return isa;
}

}  // namespace

const char* isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
  }
  return "unknown";
}

Isa detected_isa() noexcept {
#if defined(QD_WITH_AVX2)
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Isa::Avx2;
#endif
  return Isa::Scalar;
}

Isa active_isa() noexcept { return active().load(std::memory_order_relaxed); }

void force_isa(Isa isa) noexcept {
  if (isa == Isa::Avx2 && detected_isa() != Isa::Avx2) isa = Isa::Scalar;
  active().store(isa, std::memory_order_relaxed);
}

void horner(const HornerArgs& a) noexcept {
#if defined(QD_WITH_AVX2)
  if (active_isa() == Isa::Avx2) {
    horner_avx2(a);
    return;
  }
#endif
  horner_scalar(a);
}

void level_residual(std::span<const double> p_re, std::span<const double> p_im,
                    std::span<const double> q_re, std::span<const double> q_im, double level,
                    std::span<double> out) noexcept {
#if defined(QD_WITH_AVX2)
  if (active_isa() == Isa::Avx2) {
    level_residual_avx2(p_re, p_im, q_re, q_im, level, out);
    return;
  }
#endif
  level_residual_scalar(p_re, p_im, q_re, q_im, level, out);
}

}  // namespace qd::simd
