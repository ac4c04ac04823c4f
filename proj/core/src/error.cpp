#include "otkit/error.hpp"

namespace otkit {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionError: return "DimensionError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::RangeError: return "RangeError";
    case ErrorCode::InvalidOrder: return "InvalidOrder";
    case ErrorCode::UnequalMass: return "UnequalMass";
    case ErrorCode::PlanMismatch: return "PlanMismatch";
    case ErrorCode::ReferenceMismatch: return "ReferenceMismatch";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::AllZero: return "AllZero";
    case ErrorCode::ZeroDensity: return "ZeroDensity";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::RefinementInfeasible: return "RefinementInfeasible";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NonMonotoneMap: return "NonMonotoneMap";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
  }
  return "Unknown";
}

ErrorCategory category(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::IoError:
    case ErrorCode::FormatError:
    case ErrorCode::EmptyCorpus:
      return ErrorCategory::Io;
    case ErrorCode::AllZero:
    case ErrorCode::ZeroDensity:
    case ErrorCode::Infeasible:
    case ErrorCode::RefinementInfeasible:
    case ErrorCode::NoConvergence:
    case ErrorCode::NonMonotoneMap:
      return ErrorCategory::Numeric;
    default:
      return ErrorCategory::Usage;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace otkit
