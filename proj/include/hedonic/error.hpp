#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hedonic {

enum class ErrorCode {
  kNearBoundary,
  kOrderTooHigh,
  kNonFinite,
  kAnalyticUnavailable,
  kNoConvergence,
  kSingularMatrix,
  kBoundaryMaximizer,
  kNonUniqueMaximizer,
  kNotNegativeDefinite,
  kSegmentDefect,
  kOutOfDomain,
  kIndefinitePotential,
  kDegenerateNeighbourhood,
  kInvalidArgument,
  kConfig,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for numerical and input failures. The code lets
/// scanners tell a rejected probe from a genuine bug.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hedonic
