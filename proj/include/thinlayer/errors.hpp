#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace thinlayer {

enum class ErrorCode {
  DegenerateChart,
  UnknownPreset,
  InvalidParams,
  OverlapViolation,
  SingularM,
  GridTooCoarse,
  SandwichViolation,
  TooCoarse,
  AsymmetryDetected,
  GridMismatch,
  NoConvergence,
  TooManyEigenpairs,
  ClusterMismatch,
  SingularShift,
  AllZeroField,
  EmptyNodalSet,
  RootBracketFailure,
  IoFailure,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so that
/// callers (and the sweep driver) can tell a geometry problem from a solver one.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace thinlayer
