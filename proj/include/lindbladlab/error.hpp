#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lindblad {

enum class ErrorCode {
  SingularInput,
  NotPositive,
  SpectrumAtSingularity,
  DimensionMismatch,
  CapExceeded,
  StepFailure,
  BadDecomposition,
  AssumptionViolated,
  Divergent,
  GridTooCoarse,
  NonConvergent,
  GenerationFailed,
  InvariantViolation,
  InvalidArgument,
  ParseError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::SingularInput: return "SingularInput";
    case ErrorCode::NotPositive: return "NotPositive";
    case ErrorCode::SpectrumAtSingularity: return "SpectrumAtSingularity";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::CapExceeded: return "CapExceeded";
    case ErrorCode::StepFailure: return "StepFailure";
    case ErrorCode::BadDecomposition: return "BadDecomposition";
    case ErrorCode::AssumptionViolated: return "AssumptionViolated";
    case ErrorCode::Divergent: return "Divergent";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::NonConvergent: return "NonConvergent";
    case ErrorCode::GenerationFailed: return "GenerationFailed";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a code so the CLI can report
/// it as a structured object.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& detail) {
  throw Error(code, detail);
}

}  // namespace lindblad
