#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace otkit {

enum class ErrorCode {
  // caller supplied something malformed
  DimensionError,
  DimensionMismatch,
  RangeError,
  InvalidOrder,
  UnequalMass,
  PlanMismatch,
  ReferenceMismatch,
  OutOfBounds,
  InvalidArgument,
  // numerical failures
  AllZero,
  ZeroDensity,
  Infeasible,
  RefinementInfeasible,
  NoConvergence,
  NonMonotoneMap,
  // files and codecs
  IoError,
  FormatError,
  EmptyCorpus,
};

enum class ErrorCategory { Usage, Io, Numeric };

std::string_view to_string(ErrorCode code) noexcept;
ErrorCategory category(ErrorCode code) noexcept;

/// Single exception type for the library. The code identifies the failure;
/// the message carries the human-readable diagnostic.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace otkit
