#include "rexha/error.hpp"

namespace rexha {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid_argument";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kNotFound: return "not_found";
    case ErrorKind::kBudgetOverflow: return "budget_overflow";
    case ErrorKind::kTransport: return "transport";
    case ErrorKind::kEmptyOutput: return "empty_output";
    case ErrorKind::kNumeric: return "numeric";
    case ErrorKind::kRange: return "range";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

}  // namespace rexha
