#pragma once

#include <stdexcept>
#include <string>

namespace codednfv {

enum class ErrorKind {
  LengthMismatch,
  RankDeficient,
  InconsistentSystem,
  TooLarge,
  ZeroMatrix,
  InvalidArg,
  Parse,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::InconsistentSystem: return "InconsistentSystem";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::ZeroMatrix: return "ZeroMatrix";
    case ErrorKind::InvalidArg: return "InvalidArg";
    case ErrorKind::Parse: return "Parse";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace codednfv
