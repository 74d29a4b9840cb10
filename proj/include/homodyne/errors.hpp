#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace homodyne {

enum class ErrorCode {
  invalid_argument,
  invalid_model,
  no_convergence,
  breakdown_exceeded,
  singular_matrix,
  no_crossing,
  out_of_grid,
  unbalanceable,
  grid_mismatch,
  rank_deficient,
  non_positive_input,
  infeasible,
  parse_error,
  io_error,
  integrity_error,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries a machine-checkable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised by validate(); lists every violated invariant, not just the first.
class InvalidModel : public Error {
 public:
  explicit InvalidModel(std::vector<std::string> diagnostics);

  const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<std::string> diagnostics_;
};

}  // namespace homodyne
