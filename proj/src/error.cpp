#include "qd/error.hpp"

namespace qd {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::ZeroPolynomial: return "ZeroPolynomial";
    case Errc::ConvergenceFailure: return "ConvergenceFailure";
    case Errc::NotAPole: return "NotAPole";
    case Errc::NotCoprime: return "NotCoprime";
    case Errc::WrongOrder: return "WrongOrder";
    case Errc::NotFiniteCritical: return "NotFiniteCritical";
    case Errc::GuardViolation: return "GuardViolation";
    case Errc::ConstantRational: return "ConstantRational";
    case Errc::BranchAmbiguity: return "BranchAmbiguity";
    case Errc::StartTooClose: return "StartTooClose";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::PoleOnPath: return "PoleOnPath";
    case Errc::WrongProvenance: return "WrongProvenance";
    case Errc::PathBlocked: return "PathBlocked";
    case Errc::ResidueObstruction: return "ResidueObstruction";
    case Errc::EmptyLevel: return "EmptyLevel";
    case Errc::SchemaError: return "SchemaError";
    case Errc::DegreeCap: return "DegreeCap";
    case Errc::NoShortTrajectory: return "NoShortTrajectory";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace qd
