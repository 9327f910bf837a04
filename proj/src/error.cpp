#include "nldp/error.hpp"

namespace nldp {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return "ConfigError";
    case ErrorKind::invalid_argument: return "InvalidArgument";
    case ErrorKind::evaluation_failure: return "EvaluationFailure";
    case ErrorKind::quadrature_failure: return "QuadratureFailure";
    case ErrorKind::non_exit: return "NonExit";
    case ErrorKind::jump_budget_exceeded: return "JumpBudgetExceeded";
    case ErrorKind::truncation_budget_exceeded: return "TruncationBudgetExceeded";
    case ErrorKind::unsupported_kernel: return "UnsupportedKernel";
    case ErrorKind::unsupported_coefficient: return "UnsupportedCoefficient";
    case ErrorKind::atom_off_grid: return "AtomOffGrid";
    case ErrorKind::singular_system: return "SingularSystem";
  }
  return "Unknown";
}

ErrorCategory category_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::invalid_argument:
    case ErrorKind::unsupported_kernel:
    case ErrorKind::unsupported_coefficient:
    case ErrorKind::atom_off_grid:
      return ErrorCategory::validation;
    default:
      return ErrorCategory::simulation;
  }
}

}  // namespace nldp
