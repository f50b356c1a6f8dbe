#include "thinlayer/errors.hpp"

#include <fmt/format.h>

namespace thinlayer {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateChart: return "DegenerateChart";
    case ErrorCode::UnknownPreset: return "UnknownPreset";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::OverlapViolation: return "OverlapViolation";
    case ErrorCode::SingularM: return "SingularM";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::SandwichViolation: return "SandwichViolation";
    case ErrorCode::TooCoarse: return "TooCoarse";
    case ErrorCode::AsymmetryDetected: return "AsymmetryDetected";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::TooManyEigenpairs: return "TooManyEigenpairs";
    case ErrorCode::ClusterMismatch: return "ClusterMismatch";
    case ErrorCode::SingularShift: return "SingularShift";
    case ErrorCode::AllZeroField: return "AllZeroField";
    case ErrorCode::EmptyNodalSet: return "EmptyNodalSet";
    case ErrorCode::RootBracketFailure: return "RootBracketFailure";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(fmt::format("{}: {}", to_string(code), message)), code_(code) {}

}  // namespace thinlayer
