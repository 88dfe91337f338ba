#pragma once

#include <stdexcept>
#include <string>

namespace vagt {

enum class ErrorKind {
  NonHermitian,
  BadDimension,
  SizeMismatch,
  TableTooLarge,
  IndexOutOfRange,
  AsymmetricGenerator,
  NumericalBreakdown,
  OnlyTwoQubits,
  BadEffectiveOperator,
  NotProjector,
  NonCircuitU0,
  ParseError,
  ConfigError,
  UnknownName,
  InvalidArgument,
};

inline const char *to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonHermitian: return "NonHermitian";
    case ErrorKind::BadDimension: return "BadDimension";
    case ErrorKind::SizeMismatch: return "SizeMismatch";
    case ErrorKind::TableTooLarge: return "TableTooLarge";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::AsymmetricGenerator: return "AsymmetricGenerator";
    case ErrorKind::NumericalBreakdown: return "NumericalBreakdown";
    case ErrorKind::OnlyTwoQubits: return "OnlyTwoQubits";
    case ErrorKind::BadEffectiveOperator: return "BadEffectiveOperator";
    case ErrorKind::NotProjector: return "NotProjector";
    case ErrorKind::NonCircuitU0: return "NonCircuitU0";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::UnknownName: return "UnknownName";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Library-wide exception. `kind()` identifies the failure class; `what()`
/// is prefixed with the kind name.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace vagt
