#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qd/tracer.hpp"

namespace qd {

struct CriticalEdge {
  std::size_t from_node = 0;
  std::size_t to_node = 0;
  std::vector<Complex> polyline;
  double phi_length = 0.0;
  bool is_short = false;
  Termination termination = Termination::HitCritical;
  int direction_index = 0;
  double imag_drift = 0.0;
};

/// Node ids are indices into nodes (the differential's critical points, infinity last).
struct CriticalGraph {
  std::vector<CriticalPoint> nodes;
  std::vector<CriticalEdge> edges;
  std::vector<TrajectoryRay> unresolved;
  std::size_t launches = 0;
  std::vector<std::string> diagnostics;

  std::vector<CriticalEdge> short_edges() const;
};

struct GraphOptions {
  TraceOptions trace;
  /// Midpoint distance below which two short edges with matching endpoints
  /// are the same trajectory. Default 1e-3 * length scale.
  double dedup_tolerance = 0.0;
  bool parallel = true;

  static GraphOptions defaults_for(const QuadraticDifferential& qd);
};

CriticalGraph build_critical_graph(const QuadraticDifferential& qd, const GraphOptions& opts);
CriticalGraph build_critical_graph(const QuadraticDifferential& qd);

std::vector<CriticalEdge> find_short_trajectories(const QuadraticDifferential& qd, const GraphOptions& opts);
std::vector<CriticalEdge> find_short_trajectories(const QuadraticDifferential& qd);

/// Pairs of zero node ids.
struct Pairing {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  /// Set when only the greedy pass ran (more than 10 zeros).
  bool heuristic = false;
};
struct PairingFailure {
  std::vector<std::size_t> unmatched;
  std::vector<std::pair<std::size_t, std::size_t>> partial;
};
using PairingResult = std::variant<Pairing, PairingFailure>;

/// Perfect matching of the zeros over detected short edges. Throws
/// WrongProvenance when phi has no p/q^2 form.
PairingResult pair_zeros_by_short_trajectories(const QuadraticDifferential& qd, const CriticalGraph& graph);
PairingResult pair_zeros_by_short_trajectories(const QuadraticDifferential& qd);

enum class RecurrenceVerdict { SuspectedRecurrent, NotRecurrent, Undetermined };
const char* to_string(RecurrenceVerdict v) noexcept;

struct RecurrenceReport {
  int crossings = 0;
  bool closed = false;
  RecurrenceVerdict verdict = RecurrenceVerdict::Undetermined;
  /// Termination that decided NotRecurrent (Closed, HitCritical, EscapedWindow).
  std::optional<Termination> reason;
  std::vector<Complex> transversal;
  TrajectoryRay ray;
};

inline constexpr int kRecurrenceMinCrossings = 20;

/// Default transversal half-length (phi-length per side): 0.25 * length scale.
double default_transversal_halflength(const QuadraticDifferential& qd);

RecurrenceReport detect_recurrence(const QuadraticDifferential& qd, Complex z0, const TraceOptions& opts,
                                   int k_min = kRecurrenceMinCrossings,
                                   std::optional<double> transversal_halflength = std::nullopt);

/// Transversal crossings of polyline a by polyline b (proper intersections only).
int count_crossings(std::span<const Complex> a, std::span<const Complex> b);

}  // namespace qd
