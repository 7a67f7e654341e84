#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "qd/graph.hpp"

namespace qd {

enum class Criterion { ThreePole, OddMultiplicity, NoShortTrajectory, ParityPairs, ResidueCriterion };
enum class Verdict { CertifiedNoRecurrence, NumericallySupported, Inconclusive };

const char* to_string(Criterion c) noexcept;
const char* to_string(Verdict v) noexcept;
/// 2 for certified, 1 for supported, 0 for inconclusive.
int strength(Verdict v) noexcept;

struct CriterionVerdict {
  Criterion criterion = Criterion::ThreePole;
  Verdict verdict = Verdict::Inconclusive;
  nlohmann::json evidence = nlohmann::json::object();
};

CriterionVerdict three_pole(const QuadraticDifferential& qd);
CriterionVerdict odd_multiplicity(const QuadraticDifferential& qd);
CriterionVerdict no_short_trajectory_criterion(const QuadraticDifferential& qd, const CriticalGraph& graph);
/// Both throw WrongProvenance unless phi has a p/q^2 form.
CriterionVerdict parity_pairs(const QuadraticDifferential& qd, const PairingResult& pairing);
CriterionVerdict residue_criterion(const QuadraticDifferential& qd, const PairingResult& pairing);

/// Every criterion, strongest verdict first. Criteria needing the p/q^2 form
/// are reported Inconclusive when it is missing.
std::vector<CriterionVerdict> run_all(const QuadraticDifferential& qd, const CriticalGraph& graph);
std::vector<CriterionVerdict> run_all(const QuadraticDifferential& qd);
Verdict overall(const std::vector<CriterionVerdict>& verdicts) noexcept;

/// Exact rational with 64-bit parts, always reduced with a positive denominator.
class Rational {
 public:
  Rational(std::int64_t num = 0, std::int64_t den = 1);
  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }
  std::string str() const;

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a) { return Rational(-a.num_, a.den_); }
  friend bool operator==(const Rational&, const Rational&) = default;
  friend bool operator<(const Rational& a, const Rational& b);

 private:
  std::int64_t num_, den_;
};

struct PolygonVertex {
  int order = 0;              // n_j
  Rational angle_over_pi{1};  // t_j / pi
};

struct QdPolygon {
  std::vector<PolygonVertex> vertices;
  std::vector<int> interior_orders;
};

/// sum_j (1 - (n_j + 2) t_j / 2 pi) - (2 + sum_i m_i). Zero when the equality holds.
/// Throws InvalidArgument for an angle outside (0, 2 pi].
Rational teichmuller_check(const QdPolygon& polygon);

}  // namespace qd
