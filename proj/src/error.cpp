#include "hedonic/error.hpp"

namespace hedonic {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNearBoundary: return "point-too-close-to-boundary";
    case ErrorCode::kOrderTooHigh: return "order-too-high";
    case ErrorCode::kNonFinite: return "non-finite-evaluation";
    case ErrorCode::kAnalyticUnavailable: return "analytic-derivative-unavailable";
    case ErrorCode::kNoConvergence: return "no-convergence";
    case ErrorCode::kSingularMatrix: return "singular-matrix";
    case ErrorCode::kBoundaryMaximizer: return "boundary-maximizer";
    case ErrorCode::kNonUniqueMaximizer: return "non-unique-maximizer";
    case ErrorCode::kNotNegativeDefinite: return "not-negative-definite";
    case ErrorCode::kSegmentDefect: return "segment-defect";
    case ErrorCode::kOutOfDomain: return "out-of-domain";
    case ErrorCode::kIndefinitePotential: return "indefinite-potential";
    case ErrorCode::kDegenerateNeighbourhood: return "degenerate-neighbourhood";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kConfig: return "config";
  }
  return "unknown";
}

}  // namespace hedonic
