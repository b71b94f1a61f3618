#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace entroute {

enum class ErrorCode {
  kDomainError,
  kParseError,
  kInvariantViolation,
  kConnectivityFailure,
  kInvalidDemand,
  kSearchBudgetExceeded,
  kAnnotationMismatch,
  kEmptyGrid,
  kNoDemand,
  kNumericalFailure,
  kIoError,
  kCyclicFlow,
  kInfeasibleEdge,
  kStateSpaceExceeded,
  kTreeMismatch,
  kConfigError,
};

inline std::string_view to_string(ErrorCode code);

// All library failures surface as this exception; `code()` identifies the
// failure class, `what()` carries the diagnostic.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDomainError: return "DOMAIN_ERROR";
    case ErrorCode::kParseError: return "PARSE_ERROR";
    case ErrorCode::kInvariantViolation: return "INVARIANT_VIOLATION";
    case ErrorCode::kConnectivityFailure: return "CONNECTIVITY_FAILURE";
    case ErrorCode::kInvalidDemand: return "INVALID_DEMAND";
    case ErrorCode::kSearchBudgetExceeded: return "SEARCH_BUDGET_EXCEEDED";
    case ErrorCode::kAnnotationMismatch: return "ANNOTATION_MISMATCH";
    case ErrorCode::kEmptyGrid: return "EMPTY_GRID";
    case ErrorCode::kNoDemand: return "NO_DEMAND";
    case ErrorCode::kNumericalFailure: return "NUMERICAL_FAILURE";
    case ErrorCode::kIoError: return "IO_ERROR";
    case ErrorCode::kCyclicFlow: return "CYCLIC_FLOW";
    case ErrorCode::kInfeasibleEdge: return "INFEASIBLE_EDGE";
    case ErrorCode::kStateSpaceExceeded: return "STATE_SPACE_EXCEEDED";
    case ErrorCode::kTreeMismatch: return "TREE_MISMATCH";
    case ErrorCode::kConfigError: return "CONFIG_ERROR";
  }
  return "UNKNOWN";
}

}  // namespace entroute
