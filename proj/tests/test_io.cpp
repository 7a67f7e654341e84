#include <doctest.h>

#include <string>

#include "qd/error.hpp"
#include "qd/io.hpp"
#include "support.hpp"

using namespace qd;
using namespace qdtest;

namespace {

Errc code_of(const std::string& text) {
  try {
    parse_input_text(text, "t.json");
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error for " << text);
  return Errc::InvalidArgument;
}

std::string message_of(const std::string& text) {
  try {
    parse_input_text(text, "t.json");
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("general form round trip") {
  const auto spec = parse_input_text(R"({
    "format_version": 1,
    "general": {"numerator": [[-1, 0]], "denominator": [[0, 0.5], [0, 0], [-0.25, -2], [0, 0], [1, 0]]},
    "seeds": [[1, 0]],
    "budgets": {"max_phi_length": 200, "rk_tol": 1e-9},
    "window": [-2.5, -2.5, 2.5, 2.5]
  })");
  CHECK(spec.form == InputForm::General);
  REQUIRE(spec.seeds.size() == 1);
  CHECK(spec.seeds[0] == Complex(1, 0));
  CHECK(*spec.max_phi_length == 200);
  const auto qd = spec.differential();
  // the expanded denominator matches the product of its four roots
  const auto ref = figure1_left();
  std::mt19937_64 rng(71);
  for (int k = 0; k < 10; ++k) {
    const Complex z = random_point(rng, 2.0);
    CHECK(std::abs(qd(z) - ref(z)) < 1e-10 * (1 + std::abs(ref(z))));
  }
  const auto opts = trace_options(spec, qd);
  CHECK(opts.max_phi_length == 200);
  CHECK(opts.rk_tol == 1e-9);
  CHECK(opts.window.x0 == -2.5);
  const auto echo = input_echo(spec);
  CHECK(echo.contains("general"));
}

TEST_CASE("other forms") {
  const auto pq = parse_input_text(R"({"format_version":1,"p_over_q_squared":{"p":[[1,0],[0,0],[-1,0]],"q":[[1,0]]}})");
  CHECK(pq.form == InputForm::POverQSquared);
  CHECK(pq.differential().numerator().degree() == 2);
  const auto lem = parse_input_text(R"({"format_version":1,"lemniscate":{"p":[[-1,0],[0,0],[1,0]],"q":[[1,0]]},"strebel_samples":3,"random_seed":5})");
  CHECK(lem.form == InputForm::Lemniscate);
  CHECK(lem.strebel_samples == 3);
  CHECK(lem.random_seed == 5);
  const auto c = parse_input_text(R"({"format_version":1,"cauchy":{"p":[[1,0]],"q":[[0,0],[-1,0]],"r":[[0,0]]}})");
  CHECK(c.form == InputForm::Cauchy);
}

TEST_CASE("schema errors carry field and line") {
  CHECK(code_of(R"({"format_version":1})") == Errc::SchemaError);
  CHECK(code_of(R"({"format_version":2,"general":{"numerator":[[1,0]],"denominator":[[1,0]]}})") == Errc::SchemaError);
  CHECK(code_of(R"({"format_version":1,"general":{"numerator":[[1,0]],"denominator":[[1,0]]},"colour":1})") ==
        Errc::SchemaError);
  CHECK(code_of("{not json") == Errc::SchemaError);
  const std::string zero_den = "{\n  \"format_version\": 1,\n  \"general\": {\n    \"numerator\": [[1, 0]],\n"
                               "    \"denominator\": [[0, 0]]\n  }\n}";
  CHECK(code_of(zero_den) == Errc::SchemaError);
  const std::string msg = message_of(zero_den);
  CHECK(msg.find("t.json:5") != std::string::npos);
  CHECK(msg.find("denominator") != std::string::npos);
  CHECK(code_of(R"({"format_version":1,"general":{"numerator":[[1]],"denominator":[[1,0]]}})") == Errc::SchemaError);
  CHECK(code_of(R"({"format_version":1,"general":{"numerator":[[1,0]],"denominator":[[1,0]]},"window":[1,1,0,0]})") ==
        Errc::SchemaError);
  CHECK(code_of(R"({"format_version":1,"general":{"numerator":[[1,0]],"denominator":[[1,0]]},
                  "lemniscate":{"p":[[1,0]],"q":[[1,0]]}})") == Errc::SchemaError);
}

TEST_CASE("degree cap") {
  std::string coeffs;
  for (int k = 0; k <= 65; ++k) coeffs += (k ? "," : "") + std::string("[1,0]");
  CHECK(code_of(R"({"format_version":1,"general":{"numerator":[)" + coeffs + R"(],"denominator":[[1,0]]}})") ==
        Errc::DegreeCap);
}

TEST_CASE("json builders") {
  CHECK(complex_json({1.5, -2}) == nlohmann::json::array({1.5, -2.0}));
  const auto cps = critical_points_json(inverse_square());
  REQUIRE(cps.size() == 2);
  bool saw_infinity = false;
  for (const auto& c : cps) {
    if (c["at"] == "inf") saw_infinity = true;
    if (c["order"] == -2) CHECK(c.contains("double_pole_kind"));
  }
  CHECK(saw_infinity);
}
