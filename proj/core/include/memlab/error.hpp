#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace memlab {

/// Failure categories shared by every module. The CLI maps all of them to
/// exit status 2 and the HTTP layer maps them to status codes.
enum class ErrorCode {
  kInvalidInput,
  kDegenerateInput,
  kInsufficientParticipants,
  kInfeasibleSequence,
  kEmptyAggregate,
  kNumericalError,
  kFormatError,
  kNotFound,
  kConflict,
  kGone,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace memlab
