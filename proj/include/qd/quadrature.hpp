#pragma once

#include <array>
#include <complex>

namespace qd::quad {

using Complex = std::complex<double>;

/// 8-point Gauss-Legendre nodes and weights mapped to [0, 1], nodes ascending.
inline constexpr std::array<double, 8> kNodes = {
    0.019855071751231884, 0.101666761293186630, 0.237233795041835507, 0.408282678752175098,
    0.591717321247824902, 0.762766204958164493, 0.898333238706813370, 0.980144928248768116};
inline constexpr std::array<double, 8> kWeights = {
    0.050614268145188130, 0.111190517226687235, 0.156853322938943644, 0.181341891689180991,
    0.181341891689180991, 0.156853322938943644, 0.111190517226687235, 0.050614268145188130};

/// Integral of f(z) dz along the straight chord a -> b. f is called at the
/// nodes in order from a to b, so stateful branch continuation is allowed.
template <class F>
Complex chord(Complex a, Complex b, F&& f) {
  const Complex d = b - a;
  Complex acc{};
  for (std::size_t i = 0; i < kNodes.size(); ++i) acc += kWeights[i] * f(a + kNodes[i] * d);
  return acc * d;
}

/// Same integral with z = a + (b - a) s^2, which removes a square-root type
/// singularity of f at a. Nodes are visited from a to b.
template <class F>
Complex chord_singular_start(Complex a, Complex b, F&& f) {
  const Complex d = b - a;
  Complex acc{};
  for (std::size_t i = 0; i < kNodes.size(); ++i) {
    const double s = kNodes[i];
    acc += kWeights[i] * 2.0 * s * f(a + s * s * d);
  }
  return acc * d;
}

/// Real integral of g(z) |dz| along the chord a -> b.
template <class G>
double chord_abs(Complex a, Complex b, G&& g) {
  const Complex d = b - a;
  double acc = 0.0;
  for (std::size_t i = 0; i < kNodes.size(); ++i) acc += kWeights[i] * g(a + kNodes[i] * d);
  return acc * std::abs(d);
}

}  // namespace qd::quad
