#pragma once

#include <stdexcept>
#include <string>

namespace rfgan {

enum class ErrorCode {
  SpaceMismatch,
  NegativeWeight,
  AllZero,
  NotNormalized,
  BadMinMass,
  BadSpace,
  UnknownGenerator,
  Unbounded,
  BallViolation,
  DimensionMismatch,
  UnsupportedNorm,
  EmptyFeasible,
  SupportViolation,
  TooManyFeatures,
  UnknownSuite,
  NotApplicable,
  FileNotFound,
  ParseError,
  ValidationError,
};

const char* to_string(ErrorCode code);

/// Input or precondition failure. Solver outcomes (non-convergence,
/// unboundedness) are not errors; they are status fields on reports.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rfgan
