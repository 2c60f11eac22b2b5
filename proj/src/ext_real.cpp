#include <cstdio>

#include "rfgan/error.hpp"
#include "rfgan/ext_real.hpp"

namespace rfgan {

std::string ExtReal::str() const {
  if (is_pos_inf()) return "inf";
  if (is_neg_inf()) return "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", value_);
  return buf;
}

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::SpaceMismatch: return "SpaceMismatch";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::AllZero: return "AllZero";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::BadMinMass: return "BadMinMass";
    case ErrorCode::BadSpace: return "BadSpace";
    case ErrorCode::UnknownGenerator: return "UnknownGenerator";
    case ErrorCode::Unbounded: return "Unbounded";
    case ErrorCode::BallViolation: return "BallViolation";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::UnsupportedNorm: return "UnsupportedNorm";
    case ErrorCode::EmptyFeasible: return "EmptyFeasible";
    case ErrorCode::SupportViolation: return "SupportViolation";
    case ErrorCode::TooManyFeatures: return "TooManyFeatures";
    case ErrorCode::UnknownSuite: return "UnknownSuite";
    case ErrorCode::NotApplicable: return "NotApplicable";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

}  // namespace rfgan
