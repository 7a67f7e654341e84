#pragma once

#include <complex>
#include <span>
#include <vector>

namespace qd {

using Complex = std::complex<double>;

inline constexpr int kMaxDegree = 64;

/// Dense polynomial with complex coefficients stored in ascending degree.
/// The zero polynomial has no coefficients and degree -1; any other value
/// has a nonzero leading coefficient.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<Complex> coeffs);
  Polynomial(std::initializer_list<Complex> coeffs) : Polynomial(std::vector<Complex>(coeffs)) {}

  static Polynomial constant(Complex c);
  /// Monic polynomial with the given roots (repeated entries give multiplicity).
  static Polynomial from_roots(std::span<const Complex> roots, Complex leading = 1.0);

  int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const noexcept { return coeffs_.empty(); }
  std::span<const Complex> coeffs() const noexcept { return coeffs_; }
  Complex coeff(int k) const noexcept;
  Complex leading() const noexcept { return coeffs_.empty() ? Complex{} : coeffs_.back(); }

  Complex operator()(Complex z) const noexcept;
  /// Value and first derivative in one Horner pass.
  void eval_with_derivative(Complex z, Complex& value, Complex& deriv) const noexcept;
  /// Batched evaluation; goes through the SIMD Horner kernel.
  std::vector<Complex> eval_many(std::span<const Complex> zs) const;

  /// max(1, largest coefficient modulus).
  double coeff_scale() const noexcept;
  /// sum_k |a_k| r^k, the natural magnitude bound for Horner rounding errors.
  double abs_eval(double r) const noexcept;

  Polynomial derivative() const;
  /// Coefficients of s -> p(c + s).
  Polynomial taylor_shift(Complex c) const;
  /// z^deg * p(1/z).
  Polynomial reversed() const;

  Polynomial operator-() const;
  friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(Complex s, const Polynomial& p);
  friend bool operator==(const Polynomial& a, const Polynomial& b) = default;

 private:
  void normalize();
  std::vector<Complex> coeffs_;
};

Complex poly_eval(const Polynomial& p, Complex z);
Polynomial poly_derivative(const Polynomial& p);

struct DivMod {
  Polynomial quotient;
  Polynomial remainder;
};
DivMod divmod(const Polynomial& num, const Polynomial& den);

/// Synthetic division by (z - root)^times, remainder discarded.
Polynomial deflate(const Polynomial& p, Complex root, int times = 1);

struct RootCluster {
  Complex location;
  int multiplicity = 1;
  double radius = 0.0;  // spread of the merged root estimates
};

/// All roots with multiplicities (Aberth-Ehrlich iteration, then clustering).
/// Throws Error{ConvergenceFailure} when the iteration cap is hit and
/// Error{InvalidArgument} for degree < 1.
std::vector<RootCluster> poly_roots(const Polynomial& p);

/// Clustering radius used by poly_roots and the coprimality test.
double cluster_tolerance(std::span<const RootCluster> roots);

bool coprime_check(const Polynomial& p, const Polynomial& q);

/// Coefficient of (z-b)^-1 in the Laurent expansion of P/Q at a pole b of the
/// given order. Exact series division on Taylor-shifted coefficients.
Complex rational_residue(const Polynomial& num, const Polynomial& den, Complex b, int order);

/// Taylor coefficient k of P/Q at b where Q(b) != 0 (series division).
Complex rational_taylor_coeff(const Polynomial& num, const Polynomial& den, Complex b, int k);

}  // namespace qd
