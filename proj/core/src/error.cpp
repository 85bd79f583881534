#include "strongreg/error.hpp"

namespace strongreg {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::DegenerateCorrelation: return "DegenerateCorrelation";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::InvalidCorrelation: return "InvalidCorrelation";
    case ErrorCode::InvalidCorruption: return "InvalidCorruption";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyTestSet: return "EmptyTestSet";
    case ErrorCode::DegenerateWeights: return "DegenerateWeights";
    case ErrorCode::SingularDelta: return "SingularDelta";
    case ErrorCode::NegativeRadicand: return "NegativeRadicand";
    case ErrorCode::CorrelationOutOfRange: return "CorrelationOutOfRange";
    case ErrorCode::ZeroColumn: return "ZeroColumn";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace strongreg
