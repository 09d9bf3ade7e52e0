#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace trajopt {

enum class ErrorCode {
  NegativeEigenvalue,
  NotNormalized,
  DimensionMismatch,
  NonPositiveTolerance,
  NonFinite,
  NotMajorized,
  DimensionTooLarge,
  NotAVertex,
  AlphaOutOfRange,
  IndexOutOfRange,
  TOutOfRange,
  NotHermitian,
  NotUnitTrace,
  DimensionOverflow,
  WrongInstanceKind,
  ParseError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NegativeEigenvalue: return "NegativeEigenvalue";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonPositiveTolerance: return "NonPositiveTolerance";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NotMajorized: return "NotMajorized";
    case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::NotAVertex: return "NotAVertex";
    case ErrorCode::AlphaOutOfRange: return "AlphaOutOfRange";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::TOutOfRange: return "TOutOfRange";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NotUnitTrace: return "NotUnitTrace";
    case ErrorCode::DimensionOverflow: return "DimensionOverflow";
    case ErrorCode::WrongInstanceKind: return "WrongInstanceKind";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it to a stable exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace trajopt
