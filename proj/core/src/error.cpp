#include "memlab/error.hpp"

namespace memlab {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidInput: return "InvalidInput";
    case ErrorCode::kDegenerateInput: return "DegenerateInput";
    case ErrorCode::kInsufficientParticipants: return "InsufficientParticipants";
    case ErrorCode::kInfeasibleSequence: return "InfeasibleSequence";
    case ErrorCode::kEmptyAggregate: return "EmptyAggregate";
    case ErrorCode::kNumericalError: return "NumericalError";
    case ErrorCode::kFormatError: return "FormatError";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kConflict: return "Conflict";
    case ErrorCode::kGone: return "Gone";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace memlab
