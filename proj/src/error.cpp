#include "randcert/error.hpp"

namespace randcert {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::UnknownParty: return "UnknownParty";
    case ErrorCode::AlreadyInterrupted: return "AlreadyInterrupted";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NormalizationError: return "NormalizationError";
    case ErrorCode::SignalingError: return "SignalingError";
    case ErrorCode::InvalidCorrelators: return "InvalidCorrelators";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::IncompleteProjectorSet: return "IncompleteProjectorSet";
    case ErrorCode::LevelTooLarge: return "LevelTooLarge";
    case ErrorCode::IncompatibleInflations: return "IncompatibleInflations";
    case ErrorCode::SolutionShapeMismatch: return "SolutionShapeMismatch";
    case ErrorCode::UnknownDistribution: return "UnknownDistribution";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::SolverFailure: return "SolverFailure";
  }
  return "Unknown";
}

}  // namespace randcert
