#pragma once

// Batched complex Horner evaluation. The scalar kernel is the reference; the
// AVX2/FMA kernel processes four evaluation points per iteration in
// structure-of-arrays layout and is selected at runtime when the CPU supports
// it. Both variants are compiled into every build on x86-64.

#include <cstddef>
#include <span>

namespace qd::simd {

enum class Isa { Scalar, Avx2 };

const char* isa_name(Isa isa) noexcept;

/// Best ISA the running CPU supports (and this build was compiled for).
Isa detected_isa() noexcept;
/// ISA used by the dispatching entry points. Honors QD_SIMD=scalar|avx2.
Isa active_isa() noexcept;
/// Test hook: pin the dispatcher. Requests for an unsupported ISA fall back to scalar.
void force_isa(Isa isa) noexcept;

/// out[i] = sum_k c[k] * x[i]^k for the polynomial with ascending coefficients
/// (c_re, c_im). All x/out spans must have the same length.
struct HornerArgs {
  std::span<const double> c_re, c_im;
  std::span<const double> x_re, x_im;
  std::span<double> out_re, out_im;
};

void horner_scalar(const HornerArgs& a) noexcept;
#if defined(QD_WITH_AVX2)
void horner_avx2(const HornerArgs& a) noexcept;
#endif

void horner(const HornerArgs& a) noexcept;

/// out[i] = |p(x_i)|^2 - level^2 * |q(x_i)|^2 on precomputed values.
void level_residual_scalar(std::span<const double> p_re, std::span<const double> p_im,
                           std::span<const double> q_re, std::span<const double> q_im,
                           double level, std::span<double> out) noexcept;
#if defined(QD_WITH_AVX2)
void level_residual_avx2(std::span<const double> p_re, std::span<const double> p_im,
                         std::span<const double> q_re, std::span<const double> q_im,
                         double level, std::span<double> out) noexcept;
#endif
void level_residual(std::span<const double> p_re, std::span<const double> p_im,
                    std::span<const double> q_re, std::span<const double> q_im, double level,
                    std::span<double> out) noexcept;

}  // namespace qd::simd
