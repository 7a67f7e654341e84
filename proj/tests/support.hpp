#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "qd/qdiff.hpp"

namespace qdtest {

using qd::Complex;
using qd::Polynomial;

inline constexpr double kPi = std::numbers::pi;

inline Complex random_point(std::mt19937_64& rng, double radius) {
  std::uniform_real_distribution<double> u(-radius, radius);
  return {u(rng), u(rng)};
}

/// Roots at least `sep` apart inside the square of half side `radius`.
inline std::vector<Complex> separated_points(std::mt19937_64& rng, int count, double radius, double sep) {
  std::vector<Complex> pts;
  while (static_cast<int>(pts.size()) < count) {
    const Complex z = random_point(rng, radius);
    bool ok = true;
    for (const Complex w : pts) ok = ok && std::abs(z - w) >= sep;
    if (ok) pts.push_back(z);
  }
  return pts;
}

inline Polynomial random_poly(std::mt19937_64& rng, int degree) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Complex> c(static_cast<std::size_t>(degree) + 1);
  for (auto& x : c) x = {g(rng), g(rng)};
  if (std::abs(c.back()) < 0.1) c.back() = 1.0;
  return Polynomial(std::move(c));
}

/// Naive power-sum evaluation, independent of Horner.
inline Complex naive_eval(const Polynomial& p, Complex z) {
  Complex s{};
  for (int k = 0; k <= p.degree(); ++k) s += p.coeff(k) * std::pow(z, k);
  return s;
}

/// Residue of f at b by the trapezoid rule on a circle (spectrally accurate).
template <class F>
Complex contour_residue(F&& f, Complex b, double rho, int n = 4096) {
  Complex s{};
  for (int k = 0; k < n; ++k) {
    const Complex e = std::polar(1.0, 2 * kPi * k / n);
    s += f(b + rho * e) * rho * e;
  }
  return s / static_cast<double>(n);
}

inline const Polynomial& one() {
  static const Polynomial p = Polynomial::constant(1.0);
  return p;
}

inline qd::QuadraticDifferential figure1_left() {
  const std::vector<Complex> r{0.5, -0.5, {1, 1}, {-1, -1}};
  return qd::qd_new(Polynomial::constant(-1.0), Polynomial::from_roots(r));
}

inline qd::QuadraticDifferential figure1_right() {
  const std::vector<Complex> r{0.5, {1, 1}, {2, -1}};
  return qd::qd_new(Polynomial({0.0, -1.0}), Polynomial::from_roots(r));
}

inline qd::QuadraticDifferential inverse_square() {
  return qd::qd_new(Polynomial::constant(-1.0), Polynomial({0.0, 0.0, 1.0}));
}

// Minimal XML well-formedness checker: tags nest, attributes are quoted,
// comments and the declaration are skipped, exactly one root element.
struct XmlCheck {
  bool ok = false;
  std::string root;
  int elements = 0;
  std::string error;
};

inline XmlCheck check_xml(const std::string& s) {
  XmlCheck r;
  std::vector<std::string> stack;
  int roots = 0;
  std::size_t i = 0;
  auto fail = [&](const std::string& e) {
    r.error = e + " at " + std::to_string(i);
    r.ok = false;
    return r;
  };
  auto name_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == ':'; };
  while (i < s.size()) {
    if (s[i] != '<') {
      if (stack.empty() && !std::isspace(static_cast<unsigned char>(s[i]))) return fail("text outside root");
      if (s[i] == '&') {
        const std::size_t semi = s.find(';', i);
        if (semi == std::string::npos || semi - i > 6) return fail("bad entity");
      }
      ++i;
      continue;
    }
    if (s.compare(i, 4, "<!--") == 0) {
      const std::size_t e = s.find("-->", i + 4);
      if (e == std::string::npos) return fail("open comment");
      i = e + 3;
      continue;
    }
    if (s.compare(i, 2, "<?") == 0) {
      const std::size_t e = s.find("?>", i + 2);
      if (e == std::string::npos) return fail("open declaration");
      i = e + 2;
      continue;
    }
    if (s.compare(i, 2, "</") == 0) {
      std::size_t j = i + 2;
      while (j < s.size() && name_char(s[j])) ++j;
      const std::string name = s.substr(i + 2, j - i - 2);
      if (j >= s.size() || s[j] != '>') return fail("bad end tag");
      if (stack.empty() || stack.back() != name) return fail("mismatched </" + name + ">");
      stack.pop_back();
      i = j + 1;
      continue;
    }
    std::size_t j = i + 1;
    while (j < s.size() && name_char(s[j])) ++j;
    const std::string name = s.substr(i + 1, j - i - 1);
    if (name.empty()) return fail("empty tag name");
    // attributes
    while (true) {
      while (j < s.size() && std::isspace(static_cast<unsigned char>(s[j]))) ++j;
      if (j >= s.size()) return fail("open tag");
      if (s[j] == '>' || s.compare(j, 2, "/>") == 0) break;
      const std::size_t a = j;
      while (j < s.size() && name_char(s[j])) ++j;
      if (j == a || j >= s.size() || s[j] != '=') return fail("bad attribute");
      ++j;
      if (j >= s.size() || (s[j] != '"' && s[j] != '\'')) return fail("unquoted attribute");
      const char q = s[j];
      const std::size_t e = s.find(q, j + 1);
      if (e == std::string::npos) return fail("open attribute");
      if (s.substr(j + 1, e - j - 1).find('<') != std::string::npos) return fail("< in attribute");
      j = e + 1;
    }
    if (stack.empty()) {
      ++roots;
      r.root = name;
    }
    ++r.elements;
    if (s[j] == '/') {
      i = j + 2;
    } else {
      stack.push_back(name);
      i = j + 1;
    }
  }
  if (!stack.empty()) return fail("unclosed <" + stack.back() + ">");
  if (roots != 1) return fail("expected one root, got " + std::to_string(roots));
  r.ok = true;
  return r;
}

}  // namespace qdtest
