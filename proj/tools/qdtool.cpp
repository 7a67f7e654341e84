// qdtool: batch front end for trajectory analysis of rational quadratic differentials.
//
// Exit codes: 0 some criterion certifies or supports non-recurrence, 10 everything
// inconclusive (or a reported obstruction), 20 a seed looks recurrent, 1 errors.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qd/cauchy.hpp"
#include "qd/criteria.hpp"
#include "qd/error.hpp"
#include "qd/graph.hpp"
#include "qd/io.hpp"
#include "qd/lemniscate.hpp"
#include "qd/level.hpp"
#include "qd/svg.hpp"

using namespace qd;
using nlohmann::json;

namespace {

constexpr int kExitCertified = 0;
constexpr int kExitError = 1;
constexpr int kExitInconclusive = 10;
constexpr int kExitRecurrent = 20;

std::vector<double> split_numbers(const std::string& s, std::size_t want, const char* what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || !std::isfinite(v))
      throw Error(Errc::InvalidArgument, std::string("bad ") + what + " '" + s + "'");
    out.push_back(v);
  }
  if (out.size() != want) throw Error(Errc::InvalidArgument, std::string("bad ") + what + " '" + s + "'");
  return out;
}

Complex parse_point(const std::string& s) {
  const auto v = split_numbers(s, 2, "point");
  return {v[0], v[1]};
}

Window parse_window(const std::string& s) {
  const auto v = split_numbers(s, 4, "window");
  Window w{v[0], v[1], v[2], v[3]};
  if (!w.valid()) throw Error(Errc::InvalidArgument, "window needs x0 < x1 and y0 < y1");
  return w;
}

struct Common {
  std::string input;
  double rk_tol = 0.0;
};

struct Loaded {
  InputSpec spec;
  QuadraticDifferential qd;
  TraceOptions opts;
};

Loaded load(const Common& c) {
  InputSpec spec = parse_input_file(c.input);
  QuadraticDifferential qd = spec.differential();
  TraceOptions opts = trace_options(spec, qd);
  if (c.rk_tol > 0) opts.rk_tol = c.rk_tol;
  opts.validate();
  return {std::move(spec), std::move(qd), opts};
}

json envelope(const Loaded& l) {
  json j;
  j["format_version"] = kFormatVersion;
  j["tool_version"] = kToolVersion;
  j["input"] = input_echo(l.spec);
  j["options"] = options_json(l.opts);
  return j;
}

void emit(const std::string& out, const json& j) {
  const std::string text = j.dump(2) + "\n";
  if (out.empty() || out == "-") std::cout << text;
  else write_text_file(out, text);
}

int verdict_exit(const std::vector<CriterionVerdict>& verdicts) {
  return strength(overall(verdicts)) > 0 ? kExitCertified : kExitInconclusive;
}

// ---- analyze

int cmd_analyze(const Common& c, const std::string& out, const std::vector<std::string>& seed_args, bool timings) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  Loaded l = load(c);
  for (const auto& s : seed_args) l.spec.seeds.push_back(parse_point(s));

  GraphOptions gopts = GraphOptions::defaults_for(l.qd);
  gopts.trace = l.opts;
  const CriticalGraph graph = build_critical_graph(l.qd, gopts);
  const auto t1 = clock::now();
  const std::vector<CriterionVerdict> verdicts = run_all(l.qd, graph);
  const auto t2 = clock::now();

  json rec = json::array();
  bool recurrent = false;
  for (const Complex z0 : l.spec.seeds) {
    const RecurrenceReport r = detect_recurrence(l.qd, z0, l.opts);
    recurrent = recurrent || r.verdict == RecurrenceVerdict::SuspectedRecurrent;
    rec.push_back(recurrence_json(z0, r));
  }
  const auto t3 = clock::now();

  json j = envelope(l);
  j["tolerances"] = {{"snap_radius", l.opts.snap_radius},
                     {"rk_tol", l.opts.rk_tol},
                     {"dedup_tolerance", gopts.dedup_tolerance},
                     {"transversal_halflength", default_transversal_halflength(l.qd)},
                     {"recurrence_min_crossings", kRecurrenceMinCrossings}};
  j["critical_points"] = critical_points_json(l.qd);
  j["graph"] = graph_json(graph);
  json shorts = json::array();
  for (const CriticalEdge& e : graph.short_edges())
    shorts.push_back({{"from", e.from_node}, {"to", e.to_node}, {"phi_length", e.phi_length}});
  j["short_trajectories"] = shorts;
  j["verdicts"] = verdicts_json(verdicts);
  j["overall"] = to_string(overall(verdicts));
  j["recurrence"] = rec;
  if (timings) {
    auto ms = [](auto a, auto b) { return std::chrono::duration<double, std::milli>(b - a).count(); };
    j["timings_ms"] = {{"graph", ms(t0, t1)}, {"criteria", ms(t1, t2)}, {"recurrence", ms(t2, t3)}};
  }
  const int code = recurrent ? kExitRecurrent : verdict_exit(verdicts);
  j["exit_code"] = code;
  emit(out, j);
  return code;
}

// ---- render

std::vector<TrajectoryRay> trace_grid(const QuadraticDifferential& qd, const TraceOptions& base, const Window& w,
                                      int n) {
  TraceOptions o = base;
  o.window = w.inflated(1.5);
  o.max_steps = std::min<long>(o.max_steps, 20000);
  o.max_phi_length = 0.25 * o.max_phi_length;
  const double guard = 2.0 * o.snap_radius;
  std::vector<Complex> seeds;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      seeds.push_back({w.x0 + (i + 0.5) * w.width() / n, w.y0 + (j + 0.5) * w.height() / n});
  auto one = [&](Complex z0) {
    std::vector<TrajectoryRay> out;
    for (const auto& cp : qd.critical_points())
      if (!cp.at.is_infinity() && std::abs(z0 - cp.at.value()) < guard) return out;
    for (int orient : {1, -1}) {
      try {
        out.push_back(trace_horizontal(qd, z0, orient, o));
      } catch (const Error& e) {
        if (e.code() != Errc::StartTooClose) throw;
      }
    }
    return out;
  };
  std::vector<std::future<std::vector<TrajectoryRay>>> futs;
  for (const Complex z : seeds) futs.push_back(std::async(std::launch::async, one, z));
  std::vector<TrajectoryRay> rays;
  for (auto& f : futs)
    for (auto& r : f.get()) rays.push_back(std::move(r));
  return rays;
}

void draw_critical_points(SvgCanvas& svg, const QuadraticDifferential& qd) {
  for (const auto& cp : qd.critical_points()) {
    if (cp.at.is_infinity()) continue;
    if (cp.is_zero()) svg.zero_marker(cp.at.value(), cp.signed_order);
    else svg.pole_marker(cp.at.value(), cp.signed_order);
  }
}

int cmd_render(const Common& c, const std::string& out, const std::string& window_arg, int grid) {
  Loaded l = load(c);
  const Window w = !window_arg.empty() ? parse_window(window_arg) : l.spec.window ? *l.spec.window : default_window(l.qd);
  SvgCanvas svg(w, 800, "horizontal trajectories");
  if (grid > 0)
    for (const auto& r : trace_grid(l.qd, l.opts, w, grid)) svg.polyline(r.points, "background");

  GraphOptions gopts = GraphOptions::defaults_for(l.qd);
  gopts.trace = l.opts;
  const CriticalGraph graph = build_critical_graph(l.qd, gopts);
  for (const CriticalEdge& e : graph.edges)
    if (!e.is_short) svg.polyline(e.polyline, "critical");
  for (const TrajectoryRay& r : graph.unresolved) svg.polyline(r.points, "critical");
  for (const CriticalEdge& e : graph.edges)
    if (e.is_short) svg.polyline(e.polyline, "short");
  for (const Complex z0 : l.spec.seeds) {
    for (int orient : {1, -1}) svg.polyline(trace_horizontal(l.qd, z0, orient, l.opts).points, "seed");
  }
  draw_critical_points(svg, l.qd);
  write_text_file(out, svg.str());
  return kExitCertified;
}

// ---- trace

int cmd_trace(const Common& c, const std::string& out, const std::string& from, double length, int orientation,
              bool vertical) {
  Loaded l = load(c);
  if (length > 0) l.opts.max_phi_length = length;
  const Complex z0 = parse_point(from);
  const TrajectoryRay ray = vertical ? trace_vertical(l.qd, z0, orientation, l.opts)
                                     : trace_horizontal(l.qd, z0, orientation, l.opts);
  json j = envelope(l);
  j["options"] = options_json(l.opts);
  j["from"] = complex_json(z0);
  j["ray"] = ray_json(ray);
  emit(out, j);
  return kExitCertified;
}

// ---- criteria

int cmd_criteria(const Common& c, const std::string& out) {
  Loaded l = load(c);
  GraphOptions gopts = GraphOptions::defaults_for(l.qd);
  gopts.trace = l.opts;
  const auto verdicts = run_all(l.qd, build_critical_graph(l.qd, gopts));
  json j = envelope(l);
  j["verdicts"] = verdicts_json(verdicts);
  j["overall"] = to_string(overall(verdicts));
  emit(out, j);
  return verdict_exit(verdicts);
}

// ---- level

int cmd_level(const Common& c, const std::string& out, int n, const std::string& svg_out) {
  Loaded l = load(c);
  if (!p_over_q_squared_form(l.qd)) throw Error(Errc::WrongProvenance, "level needs phi = p/q^2");
  GraphOptions gopts = GraphOptions::defaults_for(l.qd);
  gopts.trace = l.opts;
  const CriticalGraph graph = build_critical_graph(l.qd, gopts);
  const PairingResult pairing = pair_zeros_by_short_trajectories(l.qd, graph);
  const Window w = l.spec.window ? *l.spec.window : default_window(l.qd);

  json j = envelope(l);
  const auto* fail = std::get_if<PairingFailure>(&pairing);
  if (fail) {
    j["pairing"] = {{"status", "PairingFailure"}, {"unmatched_zeros", fail->unmatched}, {"partial_pairs", fail->partial}};
  } else {
    j["pairing"] = {{"status", "ok"}, {"pairs", std::get<Pairing>(pairing).pairs}};
  }
  // The partial pairing still gives cuts; an obstruction is the more informative evidence.
  const LevelFunction lf(l.qd, graph, pairing);
  LevelField field;
  try {
    field = level_grid(lf, w, n);
  } catch (const ResidueObstructionError& e) {
    j["status"] = "ResidueObstruction";
    j["gap"] = e.gap();
    j["value"] = e.value();
    j["message"] = e.what();
    j["residue_evidence"] = residue_criterion(l.qd, pairing).evidence;
    emit(out, j);
    return kExitInconclusive;
  }
  const auto rays = verification_rays(l.qd, lf, w, 3);
  const VerificationReport rep = verify_level(field, rays, lf);
  j["status"] = fail ? "PairingFailure" : "ok";
  j["field"] = level_field_json(field);
  j["verification"] = verification_json(rep);
  emit(out, j);

  if (!svg_out.empty()) {
    SvgCanvas svg(w, 800, "level function contours");
    double lo = INFINITY, hi = -INFINITY;
    for (int jj = 0; jj < n; ++jj)
      for (int i = 0; i < n; ++i)
        if (!field.masked(i, jj) && std::isfinite(field.at(i, jj))) {
          lo = std::min(lo, field.at(i, jj));
          hi = std::max(hi, field.at(i, jj));
        }
    if (hi > lo) {
      const int levels = 24;
      for (int k = 1; k < levels; ++k)
        for (const auto& s : contour_segments(field, lo + (hi - lo) * k / levels)) svg.polyline(s, "contour");
    }
    for (const auto& cut : field.cuts) svg.polyline(cut, "cut");
    draw_critical_points(svg, l.qd);
    write_text_file(svg_out, svg.str());
  }
  return fail ? kExitInconclusive : kExitCertified;
}

// ---- lemniscate

int cmd_lemniscate(const Common& c, const std::string& out, double level, int n, const std::string& report_out) {
  Loaded l = load(c);
  if (l.spec.form != InputForm::Lemniscate) throw Error(Errc::WrongProvenance, "lemniscate needs a lemniscate spec");
  const Polynomial& p = l.spec.a;
  const Polynomial& q = l.spec.b;
  const Window w = l.spec.window ? *l.spec.window : default_window(l.qd);
  const LemniscateReport rep = analyze_lemniscate(p, q, l.spec.strebel_samples, l.spec.random_seed);

  SvgCanvas svg(w, 800, "lemniscates |r| = c");
  auto draw = [&](double c_level, const char* cls, bool required) {
    try {
      const LevelCurve curve = lemniscate_level_curve(p, q, c_level, w, n);
      for (const auto& poly : curve.polylines) svg.polyline(poly, cls);
      return curve.max_deviation;
    } catch (const Error& e) {
      if (required || e.code() != Errc::EmptyLevel) throw;
      return 0.0;
    }
  };
  for (int k = -3; k <= 3; ++k)
    if (k != 0) draw(level * std::ldexp(1.0, k), "contour", false);
  for (const double cl : rep.critical_levels)
    if (cl > 0) draw(cl, "critical", false);
  const double deviation = draw(level, "level", true);
  draw_critical_points(svg, l.qd);
  write_text_file(out, svg.str());

  if (!report_out.empty()) {
    json j = envelope(l);
    j["level"] = level;
    j["level_curve_max_deviation"] = deviation;
    j["lemniscate"] = lemniscate_json(rep);
    emit(report_out, j);
  }
  return kExitCertified;
}

// ---- cauchy

int cmd_cauchy(const Common& c, const std::string& out) {
  Loaded l = load(c);
  if (l.spec.form != InputForm::Cauchy) throw Error(Errc::WrongProvenance, "cauchy needs a cauchy spec");
  json j = envelope(l);
  try {
    const CauchyReport rep = analyze_cauchy(l.spec.a, l.spec.b, l.spec.c);
    j["status"] = "ok";
    j["cauchy"] = cauchy_json(rep);
  } catch (const Error& e) {
    if (e.code() != Errc::NoShortTrajectory) throw;
    j["status"] = "NoShortTrajectory";
    j["message"] = e.what();
    emit(out, j);
    return kExitInconclusive;
  }
  emit(out, j);
  return kExitCertified;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trajectory structure of rational quadratic differentials"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("input", common.input, "input file (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--rk-tol", common.rk_tol, "integrator tolerance override")->check(CLI::PositiveNumber);
  };

  std::string out, window, from, svg_out, report_out;
  std::vector<std::string> seeds;
  bool timings = false, vertical = false;
  int grid = 0, level_n = 64, orientation = 1, lem_n = 400;
  double length = 0.0, level_c = 1.0;

  auto* analyze = app.add_subcommand("analyze", "critical graph, criteria and recurrence report");
  add_common(analyze);
  analyze->add_option("--out", out, "report path (stdout when omitted)");
  analyze->add_option("--seed", seeds, "extra recurrence seed x,y (repeatable)");
  analyze->add_flag("--timings", timings, "include wall-clock timings (breaks byte determinism)");

  auto* render = app.add_subcommand("render", "SVG of the critical graph and trajectories");
  add_common(render);
  render->add_option("--out", out, "SVG path")->required();
  render->add_option("--window", window, "x0,y0,x1,y1");
  render->add_option("--grid", grid, "background seeds per side")->check(CLI::Range(0, 200));

  auto* trace = app.add_subcommand("trace", "trace one trajectory");
  add_common(trace);
  trace->add_option("--from", from, "start point x,y")->required();
  trace->add_option("--length", length, "phi-length budget")->check(CLI::PositiveNumber);
  trace->add_option("--out", out, "ray JSON path (stdout when omitted)");
  trace->add_option("--orientation", orientation, "+1 or -1")->check(CLI::IsMember({1, -1}));
  trace->add_flag("--vertical", vertical, "trace the orthogonal foliation");

  auto* criteria = app.add_subcommand("criteria", "non-recurrence criteria");
  add_common(criteria);
  criteria->add_option("--out", out, "verdict JSON path (stdout when omitted)");

  auto* level = app.add_subcommand("level", "level function on a grid");
  add_common(level);
  level->add_option("--grid", level_n, "samples per side")->check(CLI::Range(2, 2000));
  level->add_option("--out", out, "field JSON path")->required();
  level->add_option("--svg", svg_out, "contour overlay SVG");

  auto* lemniscate = app.add_subcommand("lemniscate", "lemniscates |p/q| = c");
  add_common(lemniscate);
  lemniscate->add_option("--level", level_c, "level c")->required()->check(CLI::PositiveNumber);
  lemniscate->add_option("--out", out, "SVG path")->required();
  lemniscate->add_option("--grid", lem_n, "marching squares samples per side")->check(CLI::Range(8, 4000));
  lemniscate->add_option("--report", report_out, "structural report JSON");

  auto* cauchy = app.add_subcommand("cauchy", "measure behind an algebraic Cauchy transform");
  add_common(cauchy);
  cauchy->add_option("--out", out, "report path (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitError;
  }

  try {
    if (analyze->parsed()) return cmd_analyze(common, out, seeds, timings);
    if (render->parsed()) return cmd_render(common, out, window, grid);
    if (trace->parsed()) return cmd_trace(common, out, from, length, orientation, vertical);
    if (criteria->parsed()) return cmd_criteria(common, out);
    if (level->parsed()) return cmd_level(common, out, level_n, svg_out);
    if (lemniscate->parsed()) return cmd_lemniscate(common, out, level_c, lem_n, report_out);
    if (cauchy->parsed()) return cmd_cauchy(common, out);
  } catch (const std::exception& e) {
    std::cerr << "qdtool: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
