#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace seqmanifold {

enum class ErrorCode {
  NotHyperbolic,
  Singular,
  AnnulusViolation,
  DimensionMismatch,
  NoDecay,
  DomainEscape,
  BadConfig,
  NoConvergence,
  SingularJacobian,
  InverseUnavailable,
  NotLocalAttractor,
  NoContractionRadius,
  EpsilonTooLarge,
  BadProfile,
  UnknownSuite,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotHyperbolic: return "NotHyperbolic";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::AnnulusViolation: return "AnnulusViolation";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NoDecay: return "NoDecay";
    case ErrorCode::DomainEscape: return "DomainEscape";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SingularJacobian: return "SingularJacobian";
    case ErrorCode::InverseUnavailable: return "InverseUnavailable";
    case ErrorCode::NotLocalAttractor: return "NotLocalAttractor";
    case ErrorCode::NoContractionRadius: return "NoContractionRadius";
    case ErrorCode::EpsilonTooLarge: return "EpsilonTooLarge";
    case ErrorCode::BadProfile: return "BadProfile";
    case ErrorCode::UnknownSuite: return "UnknownSuite";
  }
  return "Unknown";
}

/// Every failure in the library is reported through this type; `code()`
/// identifies the condition, `what()` carries a human-readable diagnostic.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace seqmanifold
