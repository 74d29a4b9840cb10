#include "homodyne/errors.hpp"

namespace homodyne {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::invalid_model: return "InvalidModel";
    case ErrorCode::no_convergence: return "NoConvergence";
    case ErrorCode::breakdown_exceeded: return "BreakdownExceeded";
    case ErrorCode::singular_matrix: return "SingularMatrix";
    case ErrorCode::no_crossing: return "NoCrossing";
    case ErrorCode::out_of_grid: return "OutOfGrid";
    case ErrorCode::unbalanceable: return "Unbalanceable";
    case ErrorCode::grid_mismatch: return "GridMismatch";
    case ErrorCode::rank_deficient: return "RankDeficient";
    case ErrorCode::non_positive_input: return "NonPositiveInput";
    case ErrorCode::infeasible: return "Infeasible";
    case ErrorCode::parse_error: return "ParseError";
    case ErrorCode::io_error: return "IoError";
    case ErrorCode::integrity_error: return "IntegrityError";
  }
  return "Unknown";
}

namespace {

std::string join_diagnostics(const std::vector<std::string>& diagnostics) {
  std::string out = "invalid detector model";
  for (const auto& d : diagnostics) {
    out += "\n  - ";
    out += d;
  }
  return out;
}

}  // namespace

InvalidModel::InvalidModel(std::vector<std::string> diagnostics)
    : Error(ErrorCode::invalid_model, join_diagnostics(diagnostics)),
      diagnostics_(std::move(diagnostics)) {}

}  // namespace homodyne
