// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <unistd.h>

#include "qd/cauchy.hpp"
#include "qd/criteria.hpp"
#include "qd/error.hpp"
#include "qd/lemniscate.hpp"
#include "qd/level.hpp"
#include "support.hpp"

using namespace qd;
using namespace qdtest;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

int failures = 0;

void criterion(int n, const std::string& name, double limit_s, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.require(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.require(secs <= limit_s, "took " + num(secs) + " s, limit " + num(limit_s) + " s");
  if (!o.ok) ++failures;
  std::printf("%s %d: %s (%.2f s)%s%s\n", o.ok ? "PASS" : "FAIL", n, name.c_str(), secs, o.detail.empty() ? "" : " - ",
              o.detail.c_str());
  std::fflush(stdout);
}

double arg_mod(Complex z) {
  double a = std::arg(z);
  if (a < -1e-12) a += 2 * kPi;
  return std::max(a, 0.0);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_tool(const std::string& args) {
  const std::string cmd = std::string("\"") + QDTOOL_PATH + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return status != -1 && WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

int main() {
  criterion(1, "tracer drift on rays of phi-length <= 50", 5.0, [](Outcome& o) {
    const std::vector<QuadraticDifferential> family{qd_new(one(), one()), inverse_square(),
                                                    qd_new(Polynomial({1.0, 0.0, -1.0}), one()), figure1_left(),
                                                    figure1_right()};
    const std::vector<Complex> seeds{{1, 0}, {0.3, 0.7}, {-0.8, -0.2}, {1.3, 0.4}};
    int rays = 0;
    double worst = 0.0;
    for (const auto& qd : family) {
      TraceOptions opts = TraceOptions::defaults_for(qd);
      opts.max_phi_length = 50;
      auto check = [&](const TrajectoryRay& r) {
        ++rays;
        worst = std::max(worst, r.imag_drift);
        o.require(r.phi_length <= 50 + 1e-9, "ray longer than budget");
        o.require(r.imag_drift <= 1e-5, "drift " + num(r.imag_drift));
      };
      for (Complex z0 : seeds) {
        for (int orient : {1, -1}) {
          try {
            check(trace_horizontal(qd, z0, orient, opts));
          } catch (const Error& e) {
            if (e.code() != Errc::StartTooClose) throw;
          }
        }
      }
      const auto cps = critical_points(qd);
      for (std::size_t i = 0; i < cps.size(); ++i) {
        if (!cps[i].is_finite_critical()) continue;
        for (int d = 0; d < cps[i].signed_order + 2; ++d) check(trace_from_critical(qd, i, d, opts));
      }
    }
    o.detail = std::to_string(rays) + " rays, max drift " + num(worst) + (o.detail.empty() ? "" : "; " + o.detail);
  });

  criterion(2, "circle domain of -1/z^2", 1.0, [](Outcome& o) {
    const auto qd = inverse_square();
    const auto r = trace_horizontal(qd, 1.0, 1, TraceOptions::defaults_for(qd));
    o.require(r.termination == Termination::Closed, std::string("termination ") + to_string(r.termination));
    o.require(std::abs(r.phi_length - 2 * kPi) <= 1e-4, "phi_length " + num(r.phi_length));
    o.require(classify_double_pole(qd, SpherePoint::finite(0.0)) == DoublePoleKind::Circular, "not circular");
  });

  criterion(3, "critical directions of z at 0", 1.0, [](Outcome& o) {
    const auto qd = qd_new(Polynomial({0.0, 1.0}), one());
    for (const auto& cp : critical_points(qd)) {
      if (cp.at.is_infinity()) continue;
      std::vector<double> a;
      for (Complex d : critical_directions(qd, cp)) a.push_back(arg_mod(d));
      std::sort(a.begin(), a.end());
      o.require(a.size() == 3, "expected 3 directions");
      for (std::size_t k = 0; k < a.size(); ++k)
        o.require(std::abs(a[k] - 2 * kPi * k / 3) <= 1e-9, "angle " + num(a[k]));
    }
  });

  criterion(4, "short trajectories of 1 - z^2 and 4 - z^2", 5.0, [](Outcome& o) {
    const auto s1 = find_short_trajectories(qd_new(Polynomial({1.0, 0.0, -1.0}), one()));
    o.require(s1.size() == 1, "1 - z^2: " + std::to_string(s1.size()) + " short trajectories");
    if (s1.size() == 1) {
      const Complex a = s1[0].polyline.front(), b = s1[0].polyline.back();
      o.require(std::abs(std::abs(a.real()) - 1) < 1e-6 && std::abs(a + b) < 1e-6, "endpoints not +-1");
      o.require(std::abs(s1[0].phi_length - kPi / 2) <= 1e-4, "length " + num(s1[0].phi_length));
    }
    const auto s2 = find_short_trajectories(qd_new(Polynomial({4.0, 0.0, -1.0}), one()));
    o.require(s2.size() == 1, "4 - z^2: " + std::to_string(s2.size()) + " short trajectories");
    if (s2.size() == 1) {
      for (Complex z : s2[0].polyline) o.require(std::abs(z.imag()) < 1e-6 && std::abs(z.real()) <= 2 + 1e-9, "off [-2,2]");
      const Complex a = s2[0].polyline.front(), b = s2[0].polyline.back();
      o.require(std::abs(std::abs(a.real()) - 2) < 1e-6 && std::abs(a + b) < 1e-6, "endpoints not +-2");
    }
  });

  criterion(5, "signed orders sum to -4 on 100 random differentials", 5.0, [](Outcome& o) {
    std::mt19937_64 rng(20240501);
    std::uniform_int_distribution<int> deg(0, 6);
    int done = 0;
    while (done < 100) {
      const Polynomial num_p = random_poly(rng, deg(rng)), den_p = random_poly(rng, deg(rng));
      int total = 0;
      for (const auto& cp : critical_points(qd_new(num_p, den_p))) total += cp.signed_order;
      o.require(total == -4, "sum " + std::to_string(total));
      ++done;
    }
  });

  criterion(6, "criteria catalog", 10.0, [](Outcome& o) {
    auto has = [](const std::vector<CriterionVerdict>& v, Criterion c) {
      for (const auto& x : v)
        if (x.criterion == c && x.verdict == Verdict::CertifiedNoRecurrence) return true;
      return false;
    };
    o.require(has(run_all(qd_new(one(), one())), Criterion::ThreePole), "phi = 1 not ThreePole certified");
    o.require(has(run_all(qd_new(Polynomial({1.0, 0.0, -1.0}), one())), Criterion::OddMultiplicity),
              "1 - z^2 not OddMultiplicity certified");
    int certified = 0;
    for (const auto& x : run_all(inverse_square())) certified += x.verdict == Verdict::CertifiedNoRecurrence;
    o.require(certified >= 2, "-1/z^2 certified by " + std::to_string(certified));
    for (const auto& qd : {figure1_left(), figure1_right()})
      for (const auto& x : run_all(qd))
        o.require(x.verdict == Verdict::Inconclusive, std::string("figure 1: ") + to_string(x.criterion) + " is " +
                                                         to_string(x.verdict));
  });

  criterion(7, "recurrence detector on figure 1 left and -1/z^2", 30.0, [](Outcome& o) {
    const auto left = figure1_left();
    TraceOptions opts = TraceOptions::defaults_for(left);
    opts.max_phi_length = 200;
    const auto r = detect_recurrence(left, 1.0, opts);
    o.require(r.verdict == RecurrenceVerdict::SuspectedRecurrent, std::string("left: ") + to_string(r.verdict));
    o.require(r.crossings >= 20, "crossings " + std::to_string(r.crossings));
    const auto circ = inverse_square();
    const auto c = detect_recurrence(circ, 1.0, TraceOptions::defaults_for(circ));
    o.require(c.verdict == RecurrenceVerdict::NotRecurrent && c.reason == Termination::Closed, "circle not Closed");
    o.detail = std::to_string(r.crossings) + " crossings" + (o.detail.empty() ? "" : "; " + o.detail);
  });

  criterion(8, "Teichmuller identity in rational arithmetic", 1.0, [](Outcome& o) {
    auto poly = [](std::vector<Rational> angles, std::vector<int> interior) {
      QdPolygon p;
      for (const Rational& t : angles) p.vertices.push_back({0, t});
      p.interior_orders = std::move(interior);
      return p;
    };
    o.require(teichmuller_check(poly({Rational(1, 2), Rational(1), Rational(1, 2)}, {-1})) == Rational(0), "table 1");
    o.require(teichmuller_check(poly({Rational(3, 2), Rational(1, 2), Rational(1, 2), Rational(1, 2)}, {-1})) ==
                  Rational(0),
              "table 2");
    o.require(teichmuller_check(poly({}, {-2})) == Rational(0), "circle domain");
  });

  criterion(9, "semicircle law from (1, -z, 1)", 5.0, [](Outcome& o) {
    const auto rep = analyze_cauchy(one(), Polynomial({0.0, -1.0}), one());
    o.require(rep.components.size() == 1, "components " + std::to_string(rep.components.size()));
    if (rep.components.empty()) return;
    const auto& c = rep.components[0];
    const Complex a = c.polyline.front(), b = c.polyline.back();
    o.require(std::abs(std::abs(a) - 2) <= 1e-6 && std::abs(a + b) <= 1e-6, "endpoints " + num(a.real()));
    const auto qd = cauchy_qd(one(), Polynomial({0.0, -1.0}), one());
    const Complex rho = measure_density_at(qd, c.polyline, 0.0);
    o.require(std::abs(rho - 1 / kPi) <= 1e-6, "density " + num(rho.real()));
    o.require(std::abs(rep.total_mass - 1.0) <= 1e-3, "mass " + num(rep.total_mass.real()));
  });

  criterion(10, "lemniscate of z^2 - 1", 30.0, [](Outcome& o) {
    const auto rep = analyze_lemniscate(Polynomial({-1.0, 0.0, 1.0}), one(), 20, 1);
    o.require(rep.finite_critical_points.size() == 1, "critical points");
    if (rep.finite_critical_points.size() == 1)
      o.require(std::abs(rep.finite_critical_points[0].at) <= 1e-8, "critical point off 0");
    o.require(rep.critical_levels.size() == 1 && std::abs(rep.critical_levels[0] - 1) <= 1e-8, "critical level");
    o.require(!rep.double_poles.empty() && rep.all_residues_negative, "residues");
    int closed = 0;
    for (const auto& s : rep.strebel_samples) closed += s.closed;
    o.require(rep.strebel_samples.size() == 20 && closed == 20, std::to_string(closed) + "/20 closed");
  });

  criterion(11, "level function and residue obstruction", 20.0, [](Outcome& o) {
    const auto seg = qd_from_p_over_q_squared(Polynomial({1.0, 0.0, -1.0}), one());
    const auto lf = make_level_function(seg);
    const Window w{-2, -2, 2, 2};
    const auto field = level_grid(lf, w, 64);
    const auto rays = verification_rays(seg, lf, w, 3);
    o.require(rays.size() == 3, "rays");
    const auto v = verify_level(field, rays, lf, 1e-5);
    o.require(v.constant_on_rays, "not constant on rays");
    o.require(v.nonconstant && v.constancy_alarms == 0, "constancy alarms " + std::to_string(v.constancy_alarms));
    const auto obs = qd_from_p_over_q_squared(Polynomial({-1.0, 0.0, 1.0}), Polynomial({-2.0, 1.0}));
    const double want = 2 * kPi * std::sqrt(3.0);
    try {
      make_level_function(obs).evaluate(3.0);
      o.require(false, "no obstruction");
    } catch (const ResidueObstructionError& e) {
      o.require(std::abs(e.gap() - want) <= 1e-3 * want, "gap " + num(e.gap()));
    }
  });

  criterion(12, "analyze is byte deterministic on figure 1 left", 60.0, [](Outcome& o) {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / ("qd_accept_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const std::string input = std::string(SPECS_DIR) + "/fig1_left.json";
    const int a = run_tool("analyze " + input + " --out " + (dir / "a.json").string());
    const int b = run_tool("analyze " + input + " --out " + (dir / "b.json").string());
    o.require(a == 20 && b == 20, "exit codes " + std::to_string(a) + ", " + std::to_string(b));
    const std::string ra = slurp(dir / "a.json"), rb = slurp(dir / "b.json");
    o.require(!ra.empty() && ra == rb, "reports differ");
    fs::remove_all(dir);
  });

  return failures == 0 ? 0 : 1;
}
