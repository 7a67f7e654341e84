#include "qd/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "qd/error.hpp"

namespace qd {

using nlohmann::json;

const char* to_string(InputForm f) noexcept {
  switch (f) {
    case InputForm::General: return "general";
    case InputForm::POverQSquared: return "p_over_q_squared";
    case InputForm::Lemniscate: return "lemniscate";
    case InputForm::Cauchy: return "cauchy";
  }
  return "?";
}

namespace {

struct Parser {
  const std::string& text;
  const std::string& source;

  int line_of(std::size_t pos) const {
    int line = 1;
    for (std::size_t i = 0; i < pos && i < text.size(); ++i)
      if (text[i] == '\n') ++line;
    return line;
  }

  [[noreturn]] void fail(const std::string& field, const std::string& what) const {
    std::ostringstream os;
    os << source;
    // Best effort: the line where the innermost key first appears.
    const std::size_t dot = field.find_last_of('.');
    std::string key = dot == std::string::npos ? field : field.substr(dot + 1);
    key = key.substr(0, key.find('['));
    if (!key.empty()) {
      const std::size_t pos = text.find("\"" + key + "\"");
      if (pos != std::string::npos) os << ":" << line_of(pos);
    }
    os << ": field '" << field << "': " << what;
    throw Error(Errc::SchemaError, os.str());
  }

  double number(const json& j, const std::string& field) const {
    if (!j.is_number()) fail(field, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(field, "expected a finite number");
    return v;
  }

  Complex pair(const json& j, const std::string& field) const {
    if (!j.is_array() || j.size() != 2) fail(field, "expected a [re, im] pair");
    return {number(j[0], field + "[0]"), number(j[1], field + "[1]")};
  }

  Polynomial poly(const json& obj, const std::string& parent, const char* key, bool allow_zero = false) const {
    const std::string field = parent + "." + key;
    if (!obj.contains(key)) fail(field, "missing");
    const json& j = obj.at(key);
    if (!j.is_array() || j.empty()) fail(field, "expected a nonempty list of [re, im] pairs");
    std::vector<Complex> c;
    for (std::size_t i = 0; i < j.size(); ++i) c.push_back(pair(j[i], field + "[" + std::to_string(i) + "]"));
    Polynomial p(std::move(c));
    if (!allow_zero && p.is_zero()) fail(field, "polynomial is identically zero");
    if (p.degree() > kMaxDegree) {
      throw Error(Errc::DegreeCap, field + ": degree " + std::to_string(p.degree()) + " exceeds " +
                                       std::to_string(kMaxDegree));
    }
    return p;
  }

  void only_keys(const json& obj, const std::string& field, std::initializer_list<const char*> keys) const {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool known = false;
      for (const char* k : keys) known = known || it.key() == k;
      if (!known) fail(field.empty() ? it.key() : field + "." + it.key(), "unknown field");
    }
  }
};

}  // namespace

InputSpec parse_input_text(const std::string& text, const std::string& source) {
  Parser ps{text, source};
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t pos = e.byte == 0 ? 0 : e.byte - 1;
    int line = 1, col = 1;
    for (std::size_t i = 0; i < pos && i < text.size(); ++i) {
      if (text[i] == '\n') ++line, col = 1;
      else ++col;
    }
    throw Error(Errc::SchemaError, source + ":" + std::to_string(line) + ":" + std::to_string(col) +
                                       ": malformed JSON (" + e.what() + ")");
  }
  if (!root.is_object()) ps.fail("(root)", "expected an object");
  ps.only_keys(root, "",
               {"format_version", "general", "p_over_q_squared", "lemniscate", "cauchy", "window", "seeds", "budgets",
                "random_seed", "strebel_samples"});

  InputSpec spec;
  int forms = 0;
  for (const char* k : {"general", "p_over_q_squared", "lemniscate", "cauchy"}) forms += root.contains(k) ? 1 : 0;
  if (forms != 1) ps.fail("(root)", "exactly one of general, p_over_q_squared, lemniscate, cauchy is required");

  if (root.contains("format_version")) {
    if (!root["format_version"].is_number_integer() || root["format_version"].get<int>() != kFormatVersion) {
      ps.fail("format_version", "unsupported format version");
    }
  }
  if (root.contains("general")) {
    const json& g = root["general"];
    if (!g.is_object()) ps.fail("general", "expected an object");
    ps.only_keys(g, "general", {"numerator", "denominator"});
    spec.form = InputForm::General;
    spec.b = ps.poly(g, "general", "denominator");
    spec.a = ps.poly(g, "general", "numerator");
  } else if (root.contains("p_over_q_squared")) {
    const json& g = root["p_over_q_squared"];
    if (!g.is_object()) ps.fail("p_over_q_squared", "expected an object");
    ps.only_keys(g, "p_over_q_squared", {"p", "q", "sign"});
    spec.form = InputForm::POverQSquared;
    spec.a = ps.poly(g, "p_over_q_squared", "p");
    spec.b = ps.poly(g, "p_over_q_squared", "q");
    if (g.contains("sign")) {
      if (!g["sign"].is_number_integer() || std::abs(g["sign"].get<int>()) != 1) {
        ps.fail("p_over_q_squared.sign", "expected +1 or -1");
      }
      spec.sign = g["sign"].get<int>();
    }
  } else if (root.contains("lemniscate")) {
    const json& g = root["lemniscate"];
    if (!g.is_object()) ps.fail("lemniscate", "expected an object");
    ps.only_keys(g, "lemniscate", {"p", "q"});
    spec.form = InputForm::Lemniscate;
    spec.a = ps.poly(g, "lemniscate", "p");
    spec.b = ps.poly(g, "lemniscate", "q");
  } else {
    const json& g = root["cauchy"];
    if (!g.is_object()) ps.fail("cauchy", "expected an object");
    ps.only_keys(g, "cauchy", {"p", "q", "r"});
    spec.form = InputForm::Cauchy;
    spec.a = ps.poly(g, "cauchy", "p");
    spec.b = ps.poly(g, "cauchy", "q", true);
    spec.c = ps.poly(g, "cauchy", "r", true);
  }

  if (root.contains("window")) {
    const json& w = root["window"];
    if (!w.is_array() || w.size() != 4) ps.fail("window", "expected [x0, y0, x1, y1]");
    Window win{ps.number(w[0], "window[0]"), ps.number(w[1], "window[1]"), ps.number(w[2], "window[2]"),
               ps.number(w[3], "window[3]")};
    if (!win.valid()) ps.fail("window", "expected x0 < x1 and y0 < y1");
    spec.window = win;
  }
  if (root.contains("seeds")) {
    const json& s = root["seeds"];
    if (!s.is_array()) ps.fail("seeds", "expected a list of [x, y] points");
    for (std::size_t i = 0; i < s.size(); ++i) spec.seeds.push_back(ps.pair(s[i], "seeds[" + std::to_string(i) + "]"));
  }
  if (root.contains("budgets")) {
    const json& b = root["budgets"];
    if (!b.is_object()) ps.fail("budgets", "expected an object");
    ps.only_keys(b, "budgets", {"max_phi_length", "max_steps", "rk_tol"});
    if (b.contains("max_phi_length")) {
      spec.max_phi_length = ps.number(b["max_phi_length"], "budgets.max_phi_length");
      if (!(*spec.max_phi_length > 0)) ps.fail("budgets.max_phi_length", "must be positive");
    }
    if (b.contains("max_steps")) {
      if (!b["max_steps"].is_number_integer() || b["max_steps"].get<long>() <= 0) {
        ps.fail("budgets.max_steps", "expected a positive integer");
      }
      spec.max_steps = b["max_steps"].get<long>();
    }
    if (b.contains("rk_tol")) {
      spec.rk_tol = ps.number(b["rk_tol"], "budgets.rk_tol");
      if (!(*spec.rk_tol > 0)) ps.fail("budgets.rk_tol", "must be positive");
    }
  }
  if (root.contains("random_seed")) {
    if (!root["random_seed"].is_number_unsigned()) ps.fail("random_seed", "expected a nonnegative integer");
    spec.random_seed = root["random_seed"].get<std::uint64_t>();
  }
  if (root.contains("strebel_samples")) {
    if (!root["strebel_samples"].is_number_integer() || root["strebel_samples"].get<int>() < 0) {
      ps.fail("strebel_samples", "expected a nonnegative integer");
    }
    spec.strebel_samples = root["strebel_samples"].get<int>();
  }
  return spec;
}

InputSpec parse_input_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::SchemaError, path + ": cannot open input file");
  std::ostringstream os;
  os << in.rdbuf();
  return parse_input_text(os.str(), path);
}

QuadraticDifferential InputSpec::differential() const {
  switch (form) {
    case InputForm::General: return qd_new(a, b);
    case InputForm::POverQSquared: return qd_from_p_over_q_squared(a, b, sign);
    case InputForm::Lemniscate: return lemniscate_qd(a, b);
    case InputForm::Cauchy: return cauchy_qd(a, b, c);
  }
  throw Error(Errc::InvalidArgument, "unknown input form");
}

TraceOptions trace_options(const InputSpec& spec, const QuadraticDifferential& qd) {
  TraceOptions o = TraceOptions::defaults_for(qd);
  if (spec.window) o.window = *spec.window;
  if (spec.max_phi_length) o.max_phi_length = *spec.max_phi_length;
  if (spec.max_steps) o.max_steps = *spec.max_steps;
  if (spec.rk_tol) o.rk_tol = *spec.rk_tol;
  return o;
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

json polyline_json(const std::vector<Complex>& pts) {
  json a = json::array();
  for (const Complex z : pts) a.push_back(complex_json(z));
  return a;
}

json polynomial_json(const Polynomial& p) {
  json a = json::array();
  for (const Complex c : p.coeffs()) a.push_back(complex_json(c));
  return a;
}

json input_echo(const InputSpec& spec) {
  json j;
  json form;
  switch (spec.form) {
    case InputForm::General:
      form = {{"numerator", polynomial_json(spec.a)}, {"denominator", polynomial_json(spec.b)}};
      break;
    case InputForm::POverQSquared:
      form = {{"p", polynomial_json(spec.a)}, {"q", polynomial_json(spec.b)}, {"sign", spec.sign}};
      break;
    case InputForm::Lemniscate:
      form = {{"p", polynomial_json(spec.a)}, {"q", polynomial_json(spec.b)}};
      break;
    case InputForm::Cauchy:
      form = {{"p", polynomial_json(spec.a)}, {"q", polynomial_json(spec.b)}, {"r", polynomial_json(spec.c)}};
      break;
  }
  j[to_string(spec.form)] = form;
  j["seeds"] = polyline_json(spec.seeds);
  j["random_seed"] = spec.random_seed;
  j["strebel_samples"] = spec.strebel_samples;
  return j;
}

json options_json(const TraceOptions& o) {
  return {{"max_phi_length", o.max_phi_length},
          {"window", {o.window.x0, o.window.y0, o.window.x1, o.window.y1}},
          {"snap_radius", o.snap_radius},
          {"rk_tol", o.rk_tol},
          {"max_steps", o.max_steps}};
}

json critical_points_json(const QuadraticDifferential& qd) {
  json a = json::array();
  const auto& crit = qd.critical_points();
  for (std::size_t i = 0; i < crit.size(); ++i) {
    const CriticalPoint& cp = crit[i];
    json j = {{"id", i},
              {"at", cp.at.is_infinity() ? json("inf") : complex_json(cp.at.value())},
              {"order", cp.signed_order},
              {"kind", cp.is_finite_critical() ? "finite_critical" : "infinite_critical"},
              {"cluster_radius", cp.radius}};
    if (cp.quadratic_residue) {
      j["quadratic_residue"] = complex_json(*cp.quadratic_residue);
      j["double_pole_kind"] = to_string(classify_double_pole(qd, cp.at));
    }
    a.push_back(j);
  }
  return a;
}

json graph_json(const CriticalGraph& g) {
  json edges = json::array();
  for (const CriticalEdge& e : g.edges) {
    json j = {{"from", e.from_node},       {"to", e.to_node},
              {"direction", e.direction_index}, {"phi_length", e.phi_length},
              {"is_short", e.is_short},     {"termination", to_string(e.termination)},
              {"imag_drift", e.imag_drift}, {"points", e.polyline.size()}};
    if (e.is_short) j["polyline"] = polyline_json(e.polyline);
    edges.push_back(j);
  }
  json unresolved = json::array();
  for (const TrajectoryRay& r : g.unresolved) {
    unresolved.push_back({{"source", r.source_point ? json(*r.source_point) : json(nullptr)},
                          {"termination", to_string(r.termination)},
                          {"phi_length", r.phi_length}});
  }
  return {{"launches", g.launches}, {"edges", edges}, {"unresolved", unresolved}, {"diagnostics", g.diagnostics}};
}

json verdicts_json(const std::vector<CriterionVerdict>& v) {
  json a = json::array();
  for (const CriterionVerdict& c : v)
    a.push_back({{"criterion", to_string(c.criterion)}, {"verdict", to_string(c.verdict)}, {"evidence", c.evidence}});
  return a;
}

json recurrence_json(Complex seed, const RecurrenceReport& r) {
  return {{"seed", complex_json(seed)},
          {"verdict", to_string(r.verdict)},
          {"reason", r.reason ? json(to_string(*r.reason)) : json(nullptr)},
          {"crossings", r.crossings},
          {"closed", r.closed},
          {"phi_length", r.ray.phi_length},
          {"imag_drift", r.ray.imag_drift},
          {"transversal_points", r.transversal.size()}};
}

json ray_json(const TrajectoryRay& ray) {
  json j = {{"termination", to_string(ray.termination)},
            {"phi_length", ray.phi_length},
            {"imag_drift", ray.imag_drift},
            {"orientation", ray.orientation},
            {"vertical", ray.vertical},
            {"direction_seed", complex_json(ray.direction_seed)},
            {"points", polyline_json(ray.points)},
            {"taus", ray.taus},
            {"diagnostics", ray.diagnostics}};
  if (ray.hit_point) {
    j["hit_point"] = *ray.hit_point;
    j["incoming_angle"] = ray.incoming_angle;
  }
  return j;
}

json level_field_json(const LevelField& f) {
  json rows = json::array();
  for (int j = 0; j < f.n; ++j) {
    json row = json::array();
    for (int i = 0; i < f.n; ++i) {
      if (f.masked(i, j) || !std::isfinite(f.at(i, j))) row.push_back(nullptr);
      else row.push_back(f.at(i, j));
    }
    rows.push_back(row);
  }
  json cuts = json::array();
  for (const auto& c : f.cuts) cuts.push_back(polyline_json(c));
  return {{"window", {f.window.x0, f.window.y0, f.window.x1, f.window.y1}},
          {"n", f.n},
          {"base_point", complex_json(f.base_point)},
          {"cuts", cuts},
          {"max_path_gap", f.max_gap},
          {"values", rows}};
}

json verification_json(const VerificationReport& v) {
  return {{"constant_on_rays", v.constant_on_rays}, {"ray_spread", v.ray_spread},
          {"ray_samples", v.ray_samples},           {"nonconstant", v.nonconstant},
          {"constancy_alarms", v.constancy_alarms}, {"continuous", v.continuous},
          {"jump_violations", v.jump_violations}};
}

json lemniscate_json(const LemniscateReport& r) {
  json cps = json::array();
  for (const LemniscatePoint& p : r.finite_critical_points)
    cps.push_back({{"at", complex_json(p.at)}, {"order", p.order}, {"level", p.level}, {"matched_distance", p.matched_distance}});
  json poles = json::array();
  for (const LemniscatePole& p : r.double_poles) {
    poles.push_back({{"at", p.at.is_infinity() ? json("inf") : complex_json(p.at.value())},
                     {"quadratic_residue", complex_json(p.quadratic_residue)},
                     {"negative", p.negative}});
  }
  json samples = json::array();
  for (const StrebelSample& s : r.strebel_samples) {
    samples.push_back({{"point", complex_json(s.point)}, {"closed", s.closed},
                       {"termination", to_string(s.termination)}, {"phi_length", s.phi_length}});
  }
  return {{"finite_critical_points", cps},
          {"double_poles", poles},
          {"critical_levels", r.critical_levels},
          {"critical_points_consistent", r.critical_points_consistent},
          {"all_residues_negative", r.all_residues_negative},
          {"strebel_samples", samples},
          {"diagnostics", r.diagnostics}};
}

json cauchy_json(const CauchyReport& r) {
  json comps = json::array();
  for (const CauchyComponent& c : r.components) {
    comps.push_back({{"from", c.from_node}, {"to", c.to_node}, {"mass", complex_json(c.mass)},
                     {"nonnegative", c.nonnegative}, {"note", c.note}, {"support", polyline_json(c.polyline)}});
  }
  return {{"components", comps}, {"total_mass", complex_json(r.total_mass)}, {"unresolved_rays", r.unresolved_rays}};
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::InvalidArgument, "cannot open " + path + " for writing");
  out << text;
  if (!out) throw Error(Errc::InvalidArgument, "failed writing " + path);
}

}  // namespace qd
