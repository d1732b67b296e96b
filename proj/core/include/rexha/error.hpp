#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rexha {

enum class ErrorKind {
  kInvalidArgument,
  kParse,
  kValidation,
  kNotFound,
  kBudgetOverflow,
  kTransport,
  kEmptyOutput,
  kNumeric,
  kRange,
  kIo,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  // Transport failures and empty model outputs are worth another attempt.
  bool retryable() const noexcept {
    return kind_ == ErrorKind::kTransport || kind_ == ErrorKind::kEmptyOutput;
  }

 private:
  ErrorKind kind_;
};

}  // namespace rexha
