/**
 * @file errors.hpp
 * @brief Error types shared by every roughfilm module.
 */
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace roughfilm {

enum class ErrorCode {
  NonPositiveGap,
  TooFewSamples,
  BadResolution,
  ShapeMismatch,
  SingularSystem,
  NonFinite,
  SolverFailure,
  DegenerateLambda,
  QuadratureFailure,
  OutOfDomain,
  UnsupportedRegime,
  ParseError,
  ValidationError,
  IoError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveGap: return "NonPositiveGap";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::BadResolution: return "BadResolution";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::DegenerateLambda: return "DegenerateLambda";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::UnsupportedRegime: return "UnsupportedRegime";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Config text could not be read as YAML. Line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error(ErrorCode::ParseError,
              what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// Every violated constraint of a config, not just the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations)
      : Error(ErrorCode::ValidationError, join(violations)), violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) {
      if (!out.empty()) out += "; ";
      out += s;
    }
    return out;
  }

  std::vector<std::string> violations_;
};

/// Non-fatal condition surfaced in reports.
struct Warning {
  std::string code;  // e.g. AdvectionDominated, NonPositiveA0, UnsupportedRegime
  std::string message;

  bool operator==(const Warning&) const = default;
};

}  // namespace roughfilm
