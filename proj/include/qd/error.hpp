#pragma once

#include <stdexcept>
#include <string>

namespace qd {

enum class Errc {
  ZeroPolynomial,
  ConvergenceFailure,
  NotAPole,
  NotCoprime,
  WrongOrder,
  NotFiniteCritical,
  GuardViolation,
  ConstantRational,
  BranchAmbiguity,
  StartTooClose,
  IndexOutOfRange,
  PoleOnPath,
  WrongProvenance,
  PathBlocked,
  ResidueObstruction,
  EmptyLevel,
  SchemaError,
  DegreeCap,
  NoShortTrajectory,
  InvalidArgument,
};

const char* errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// Raised when two homotopically different integration paths disagree.
class ResidueObstructionError : public Error {
 public:
  ResidueObstructionError(double gap, double value, const std::string& what)
      : Error(Errc::ResidueObstruction, what), gap_(gap), value_(value) {}

  double gap() const noexcept { return gap_; }
  double value() const noexcept { return value_; }

 private:
  double gap_;
  double value_;
};

}  // namespace qd
