#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qd/cauchy.hpp"
#include "qd/criteria.hpp"
#include "qd/lemniscate.hpp"
#include "qd/level.hpp"

namespace qd {

inline constexpr int kFormatVersion = 1;
inline constexpr const char* kToolVersion = "1.0.0";

enum class InputForm { General, POverQSquared, Lemniscate, Cauchy };
const char* to_string(InputForm f) noexcept;

struct InputSpec {
  InputForm form = InputForm::General;
  /// general: (numerator, denominator); p_over_q_squared and lemniscate: (p, q); cauchy: (p, q, r).
  Polynomial a = Polynomial::constant(1.0), b = Polynomial::constant(1.0), c = Polynomial::constant(0.0);
  int sign = 1;
  std::optional<Window> window;
  std::vector<Complex> seeds;
  std::optional<double> max_phi_length;
  std::optional<long> max_steps;
  std::optional<double> rk_tol;
  std::uint64_t random_seed = 1;
  int strebel_samples = 20;

  QuadraticDifferential differential() const;
};

/// Throws SchemaError (line/field in the message) or DegreeCap.
InputSpec parse_input_text(const std::string& text, const std::string& source = "<input>");
InputSpec parse_input_file(const std::string& path);

/// Options after defaults and input overrides; the report echoes these.
TraceOptions trace_options(const InputSpec& spec, const QuadraticDifferential& qd);

nlohmann::json complex_json(Complex z);
nlohmann::json polyline_json(const std::vector<Complex>& pts);
nlohmann::json polynomial_json(const Polynomial& p);
nlohmann::json input_echo(const InputSpec& spec);
nlohmann::json options_json(const TraceOptions& o);
nlohmann::json critical_points_json(const QuadraticDifferential& qd);
nlohmann::json graph_json(const CriticalGraph& g);
nlohmann::json verdicts_json(const std::vector<CriterionVerdict>& v);
nlohmann::json recurrence_json(Complex seed, const RecurrenceReport& r);
nlohmann::json ray_json(const TrajectoryRay& ray);
nlohmann::json level_field_json(const LevelField& f);
nlohmann::json verification_json(const VerificationReport& v);
nlohmann::json lemniscate_json(const LemniscateReport& r);
nlohmann::json cauchy_json(const CauchyReport& r);

/// Writes text atomically enough for a CLI: whole buffer, then close. Throws InvalidArgument.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace qd
