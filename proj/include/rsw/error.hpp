#ifndef RSW_ERROR_HPP
#define RSW_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace rsw {

enum class ErrorCode {
  NegativeOffDiagonal,
  RowSumNonzero,
  NotIrreducible,
  SingularSystem,
  DomainViolation,
  AbsorbingState,
  OutOfHorizon,
  OutOfDomain,
  NonFiniteValue,
  ShapeMismatch,
  SizeMismatch,
  InsufficientData,
  NonPositiveMeans,
  ZeroSeparation,
  ConfigError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NegativeOffDiagonal: return "NegativeOffDiagonal";
    case ErrorCode::RowSumNonzero: return "RowSumNonzero";
    case ErrorCode::NotIrreducible: return "NotIrreducible";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::DomainViolation: return "DomainViolation";
    case ErrorCode::AbsorbingState: return "AbsorbingState";
    case ErrorCode::OutOfHorizon: return "OutOfHorizon";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::NonPositiveMeans: return "NonPositiveMeans";
    case ErrorCode::ZeroSeparation: return "ZeroSeparation";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Library-wide exception. Every failure carries a machine-readable code so
/// that callers (and the CLI's exit-code mapping) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by the integrators when drift or diffusion produce NaN/Inf.
class NumericalAbort : public Error {
 public:
  NumericalAbort(long step, const std::string& what)
      : Error(ErrorCode::NonFiniteValue, "step " + std::to_string(step) + ": " + what),
        step_(step) {}

  long step() const noexcept { return step_; }

 private:
  long step_;
};

}  // namespace rsw

#endif  // RSW_ERROR_HPP
