#pragma once

#include <stdexcept>
#include <string>

namespace optreg {

enum class ErrorKind {
  RankDeficient,
  ConvergenceFailure,
  SingularSystem,
  NumericalBreakdown,
  InvalidFactors,
  InvalidArgument,
  SpectralMismatch,
  NoRoot,
  SymmetryViolation,
  StallNoDescent,
  SourceError,
  ZeroReference,
  ConfigError,
  DataError,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::NumericalBreakdown: return "NumericalBreakdown";
    case ErrorKind::InvalidFactors: return "InvalidFactors";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::SpectralMismatch: return "SpectralMismatch";
    case ErrorKind::NoRoot: return "NoRoot";
    case ErrorKind::SymmetryViolation: return "SymmetryViolation";
    case ErrorKind::StallNoDescent: return "StallNoDescent";
    case ErrorKind::SourceError: return "SourceError";
    case ErrorKind::ZeroReference: return "ZeroReference";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::DataError: return "DataError";
  }
  return "Unknown";
}

/// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const char* what) {
  if (!cond) fail(kind, what);
}

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace optreg
