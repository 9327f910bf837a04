#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nldp {

enum class ErrorKind {
  config,
  invalid_argument,
  evaluation_failure,
  quadrature_failure,
  non_exit,
  jump_budget_exceeded,
  truncation_budget_exceeded,
  unsupported_kernel,
  unsupported_coefficient,
  atom_off_grid,
  singular_system,
};

/// Coarse grouping used for CLI exit codes.
enum class ErrorCategory { validation, simulation };

std::string_view to_string(ErrorKind kind);
ErrorCategory category_of(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }
  ErrorCategory category() const { return category_of(kind_); }

 private:
  ErrorKind kind_;
};

}  // namespace nldp
