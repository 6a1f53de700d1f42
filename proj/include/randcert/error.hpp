#pragma once

#include <stdexcept>
#include <string>

namespace randcert {

enum class ErrorCode {
  InvalidArgument,
  ParseError,
  IoError,
  UnknownParty,
  AlreadyInterrupted,
  ShapeMismatch,
  NormalizationError,
  SignalingError,
  InvalidCorrelators,
  DimensionMismatch,
  IncompleteProjectorSet,
  LevelTooLarge,
  IncompatibleInflations,
  SolutionShapeMismatch,
  UnknownDistribution,
  InvalidParams,
  SolverFailure,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace randcert
