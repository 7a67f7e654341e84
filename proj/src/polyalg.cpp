#include "qd/polyalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qd/error.hpp"
#include "qd/kernels.hpp"

namespace qd {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

Polynomial::Polynomial(std::vector<Complex> coeffs) : coeffs_(std::move(coeffs)) { normalize(); }

void Polynomial::normalize() {
  while (!coeffs_.empty() && coeffs_.back() == Complex{}) coeffs_.pop_back();
}

Polynomial Polynomial::constant(Complex c) { return Polynomial(std::vector<Complex>{c}); }

Polynomial Polynomial::from_roots(std::span<const Complex> roots, Complex leading) {
  std::vector<Complex> c{leading};
  for (const Complex r : roots) {
    std::vector<Complex> next(c.size() + 1);
    for (std::size_t k = 0; k < c.size(); ++k) {
      next[k + 1] += c[k];
      next[k] -= r * c[k];
    }
    c = std::move(next);
  }
  return Polynomial(std::move(c));
}

Complex Polynomial::coeff(int k) const noexcept {
  if (k < 0 || k >= static_cast<int>(coeffs_.size())) return {};
  return coeffs_[static_cast<std::size_t>(k)];
}

Complex Polynomial::operator()(Complex z) const noexcept {
  Complex v{};
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) v = v * z + *it;
  return v;
}

void Polynomial::eval_with_derivative(Complex z, Complex& value, Complex& deriv) const noexcept {
  value = {};
  deriv = {};
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
    deriv = deriv * z + value;
    value = value * z + *it;
  }
}

std::vector<Complex> Polynomial::eval_many(std::span<const Complex> zs) const {
  const std::size_t n = zs.size();
  const std::size_t m = coeffs_.size();
  std::vector<double> buf(2 * m + 4 * n);
  double* cre = buf.data();
  double* cim = cre + m;
  double* xre = cim + m;
  double* xim = xre + n;
  double* ore = xim + n;
  double* oim = ore + n;
  for (std::size_t k = 0; k < m; ++k) {
    cre[k] = coeffs_[k].real();
    cim[k] = coeffs_[k].imag();
  }
  for (std::size_t i = 0; i < n; ++i) {
    xre[i] = zs[i].real();
    xim[i] = zs[i].imag();
  }
  simd::horner({{cre, m}, {cim, m}, {xre, n}, {xim, n}, {ore, n}, {oim, n}});
  std::vector<Complex> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = {ore[i], oim[i]};
  return out;
}

double Polynomial::coeff_scale() const noexcept {
  double s = 1.0;
  for (const Complex c : coeffs_) s = std::max(s, std::abs(c));
  return s;
}

double Polynomial::abs_eval(double r) const noexcept {
  double v = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) v = v * r + std::abs(*it);
  return v;
}

Polynomial Polynomial::derivative() const {
  if (coeffs_.size() <= 1) return {};
  std::vector<Complex> d(coeffs_.size() - 1);
  for (std::size_t k = 1; k < coeffs_.size(); ++k) d[k - 1] = static_cast<double>(k) * coeffs_[k];
  return Polynomial(std::move(d));
}

Polynomial Polynomial::taylor_shift(Complex c) const {
  // Repeated synthetic division; O(n^2) and stable enough for n <= 64.
  std::vector<Complex> a = coeffs_;
  const std::size_t n = a.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t k = n - 1; k > i; --k) a[k - 1] += c * a[k];
  }
  return Polynomial(std::move(a));
}

Polynomial Polynomial::reversed() const {
  std::vector<Complex> r(coeffs_.rbegin(), coeffs_.rend());
  return Polynomial(std::move(r));
}

Polynomial Polynomial::operator-() const { return Complex{-1.0} * *this; }

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
  std::vector<Complex> c(std::max(a.coeffs_.size(), b.coeffs_.size()));
  for (std::size_t k = 0; k < a.coeffs_.size(); ++k) c[k] += a.coeffs_[k];
  for (std::size_t k = 0; k < b.coeffs_.size(); ++k) c[k] += b.coeffs_[k];
  return Polynomial(std::move(c));
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-b); }

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.is_zero() || b.is_zero()) return {};
  std::vector<Complex> c(a.coeffs_.size() + b.coeffs_.size() - 1);
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
    for (std::size_t j = 0; j < b.coeffs_.size(); ++j) c[i + j] += a.coeffs_[i] * b.coeffs_[j];
  return Polynomial(std::move(c));
}

Polynomial operator*(Complex s, const Polynomial& p) {
  std::vector<Complex> c = p.coeffs_;
  for (Complex& x : c) x *= s;
  return Polynomial(std::move(c));
}

Complex poly_eval(const Polynomial& p, Complex z) { return p(z); }

Polynomial poly_derivative(const Polynomial& p) { return p.derivative(); }

DivMod divmod(const Polynomial& num, const Polynomial& den) {
  if (den.is_zero()) throw Error(Errc::ZeroPolynomial, "division by the zero polynomial");
  const int n = num.degree();
  const int m = den.degree();
  if (n < m) return {Polynomial{}, num};
  std::vector<Complex> r(num.coeffs().begin(), num.coeffs().end());
  std::vector<Complex> q(static_cast<std::size_t>(n - m + 1));
  const Complex lead = den.leading();
  for (int k = n - m; k >= 0; --k) {
    const Complex t = r[static_cast<std::size_t>(k + m)] / lead;
    q[static_cast<std::size_t>(k)] = t;
    for (int j = 0; j <= m; ++j) r[static_cast<std::size_t>(k + j)] -= t * den.coeff(j);
  }
  r.resize(static_cast<std::size_t>(m));
  return {Polynomial(std::move(q)), Polynomial(std::move(r))};
}

Polynomial deflate(const Polynomial& p, Complex root, int times) {
  std::vector<Complex> a(p.coeffs().begin(), p.coeffs().end());
  for (int t = 0; t < times && a.size() > 1; ++t) {
    std::vector<Complex> q(a.size() - 1);
    Complex carry{};
    for (std::size_t k = a.size() - 1; k >= 1; --k) {
      carry = carry * root + a[k];
      q[k - 1] = carry;
    }
    a = std::move(q);
  }
  return Polynomial(std::move(a));
}

namespace {

// Initial approximations on circles whose radii come from the upper convex
// hull of (k, log|a_k|), one circle per hull edge.
std::vector<Complex> initial_guesses(std::span<const Complex> a) {
  const int n = static_cast<int>(a.size()) - 1;
  std::vector<int> idx;
  std::vector<double> lg;
  for (int k = 0; k <= n; ++k) {
    if (a[static_cast<std::size_t>(k)] != Complex{}) {
      idx.push_back(k);
      lg.push_back(std::log(std::abs(a[static_cast<std::size_t>(k)])));
    }
  }
  std::vector<std::size_t> hull;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    while (hull.size() >= 2) {
      const std::size_t p0 = hull[hull.size() - 2], p1 = hull.back();
      const double cross = (idx[p1] - idx[p0]) * (lg[i] - lg[p0]) - (lg[p1] - lg[p0]) * (idx[i] - idx[p0]);
      if (cross >= 0) hull.pop_back();
      else break;
    }
    hull.push_back(i);
  }
  std::vector<Complex> z;
  z.reserve(static_cast<std::size_t>(n));
  const double sigma = 0.7;
  for (std::size_t h = 0; h + 1 < hull.size(); ++h) {
    const int k0 = idx[hull[h]], k1 = idx[hull[h + 1]];
    const int cnt = k1 - k0;
    const double radius = std::exp((lg[hull[h]] - lg[hull[h + 1]]) / cnt);
    for (int j = 0; j < cnt; ++j) {
      const double ang = kTwoPi * j / cnt + kTwoPi * h / n + sigma;
      z.push_back(std::polar(radius, ang));
    }
  }
  return z;
}

std::vector<Complex> aberth(const Polynomial& p) {
  const int n = p.degree();
  std::vector<Complex> z = initial_guesses(p.coeffs());
  std::vector<bool> done(static_cast<std::size_t>(n), false);
  const double err_factor = 8.0 * (n + 1) * kEps;
  constexpr int kMaxSweeps = 2000;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    int remaining = 0;
    for (int i = 0; i < n; ++i) {
      const std::size_t ii = static_cast<std::size_t>(i);
      if (done[ii]) continue;
      Complex v, d;
      p.eval_with_derivative(z[ii], v, d);
      if (std::abs(v) <= err_factor * p.abs_eval(std::abs(z[ii]))) {
        done[ii] = true;
        continue;
      }
      ++remaining;
      Complex s{};
      for (int j = 0; j < n; ++j) {
        if (j != i) s += 1.0 / (z[ii] - z[static_cast<std::size_t>(j)]);
      }
      const Complex ratio = v / d;
      Complex w = ratio / (1.0 - ratio * s);
      if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) {
        w = Complex(1e-3 * (1.0 + std::abs(z[ii])), 0.0);
      }
      z[ii] -= w;
    }
    if (remaining == 0) return z;
  }
  throw Error(Errc::ConvergenceFailure, "Aberth iteration cap reached; ill-conditioned input");
}

double root_scale(std::span<const Complex> z) {
  double s = 1.0;
  for (const Complex c : z) s = std::max(s, std::abs(c));
  return s;
}

// Is c a root of multiplicity >= m, judged on the relative size of the first
// m Taylor coefficients against their rounding-scale bounds?
bool multiplicity_plausible(const Polynomial& p, Complex c, int m) {
  const Polynomial shifted = p.taylor_shift(c);
  std::vector<Complex> absc;
  for (const Complex a : p.coeffs()) absc.emplace_back(std::abs(a), 0.0);
  const Polynomial bound = Polynomial(absc).taylor_shift(Complex(std::abs(c), 0.0));
  for (int j = 0; j < m; ++j) {
    if (std::abs(shifted.coeff(j)) > 1e-9 * std::abs(bound.coeff(j))) return false;
  }
  return true;
}

Complex polish(const Polynomial& p, Complex c, int m, double radius) {
  Polynomial d = p;
  for (int j = 1; j < m; ++j) d = d.derivative();
  const double limit = std::max(radius, 1e-12 * std::max(1.0, std::abs(c))) * 2.0;
  Complex best = c;
  for (int it = 0; it < 4; ++it) {
    Complex v, dv;
    d.eval_with_derivative(best, v, dv);
    if (dv == Complex{}) break;
    const Complex next = best - v / dv;
    if (!std::isfinite(next.real()) || !std::isfinite(next.imag())) break;
    if (std::abs(next - c) > limit) break;
    if (std::abs(d(next)) > std::abs(v)) break;
    best = next;
  }
  return best;
}

// Single-linkage groups of indices under a distance threshold.
std::vector<std::vector<std::size_t>> link_groups(std::span<const Complex> z, double tol) {
  const std::size_t n = z.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(z[i] - z[j]) <= tol) parent[find(i)] = find(j);
  std::vector<std::vector<std::size_t>> groups;
  std::vector<long> slot(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    if (slot[r] < 0) {
      slot[r] = static_cast<long>(groups.size());
      groups.emplace_back();
    }
    groups[static_cast<std::size_t>(slot[r])].push_back(i);
  }
  return groups;
}

RootCluster make_cluster(const Polynomial& p, std::span<const Complex> z,
                         const std::vector<std::size_t>& g) {
  Complex c{};
  for (const std::size_t i : g) c += z[i];
  c /= static_cast<double>(g.size());
  double radius = 0.0;
  for (const std::size_t i : g) radius = std::max(radius, std::abs(z[i] - c));
  const int m = static_cast<int>(g.size());
  return {polish(p, c, m, radius), m, radius};
}

}  // namespace

double cluster_tolerance(std::span<const RootCluster> roots) {
  double s = 1.0;
  for (const RootCluster& r : roots) s = std::max(s, std::abs(r.location));
  return 1e-8 * s;
}

std::vector<RootCluster> poly_roots(const Polynomial& p) {
  if (p.degree() < 1) throw Error(Errc::InvalidArgument, "poly_roots needs degree >= 1");
  std::vector<RootCluster> out;
  int zeros = 0;
  while (p.coeff(zeros) == Complex{}) ++zeros;
  const Polynomial rest(std::vector<Complex>(p.coeffs().begin() + zeros, p.coeffs().end()));
  if (zeros > 0) out.push_back({Complex{}, zeros, 0.0});
  if (rest.degree() < 1) return out;

  std::vector<Complex> z;
  if (rest.degree() == 1) {
    z.push_back(-rest.coeff(0) / rest.coeff(1));
  } else {
    z = aberth(rest);
  }

  const double scale = root_scale(z);
  const double tight = 1e-8 * scale;
  // Coarse to fine: a group is kept once its center passes the multiplicity test.
  std::vector<std::vector<Complex>> pending{z};
  for (double radius = 1e-2 * scale; !pending.empty(); radius *= 0.1) {
    std::vector<std::vector<Complex>> next;
    for (const auto& pts : pending) {
      for (const auto& group : link_groups(pts, std::max(radius, tight))) {
        const RootCluster cand = make_cluster(rest, pts, group);
        if (group.size() == 1 || radius <= tight || multiplicity_plausible(rest, cand.location, cand.multiplicity)) {
          out.push_back(cand);
          continue;
        }
        std::vector<Complex> sub;
        for (const std::size_t i : group) sub.push_back(pts[i]);
        next.push_back(std::move(sub));
      }
    }
    pending = std::move(next);
  }
  std::sort(out.begin(), out.end(), [](const RootCluster& a, const RootCluster& b) {
    if (a.location.real() != b.location.real()) return a.location.real() < b.location.real();
    return a.location.imag() < b.location.imag();
  });
  return out;
}

bool coprime_check(const Polynomial& p, const Polynomial& q) {
  if (p.is_zero() || q.is_zero()) throw Error(Errc::ZeroPolynomial, "coprime_check on zero polynomial");
  if (p.degree() < 1 || q.degree() < 1) return true;
  const auto rp = poly_roots(p);
  const auto rq = poly_roots(q);
  const double tol = std::max(cluster_tolerance(rp), cluster_tolerance(rq));
  for (const auto& a : rp)
    for (const auto& b : rq)
      if (std::abs(a.location - b.location) <= tol + a.radius + b.radius) return false;
  return true;
}

Complex rational_taylor_coeff(const Polynomial& num, const Polynomial& den, Complex b, int k) {
  const Polynomial a = num.taylor_shift(b);
  const Polynomial d = den.taylor_shift(b);
  const Complex d0 = d.coeff(0);
  if (d0 == Complex{}) throw Error(Errc::InvalidArgument, "series division by vanishing constant term");
  std::vector<Complex> c(static_cast<std::size_t>(k + 1));
  for (int j = 0; j <= k; ++j) {
    Complex s = a.coeff(j);
    for (int i = 1; i <= j; ++i) s -= d.coeff(i) * c[static_cast<std::size_t>(j - i)];
    c[static_cast<std::size_t>(j)] = s / d0;
  }
  return c[static_cast<std::size_t>(k)];
}

Complex rational_residue(const Polynomial& num, const Polynomial& den, Complex b, int order) {
  if (order < 1) throw Error(Errc::InvalidArgument, "pole order must be >= 1");
  if (std::abs(den(b)) > 1e-6 * std::max(1.0, den.abs_eval(std::abs(b)))) {
    throw Error(Errc::NotAPole, "denominator does not vanish at the given point");
  }
  if (order == 1) return num(b) / den.derivative()(b);
  const Polynomial reduced = deflate(den, b, order);
  return rational_taylor_coeff(num, reduced, b, order - 1);
}

}  // namespace qd
