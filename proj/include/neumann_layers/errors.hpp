#pragma once

#include <stdexcept>
#include <string>

namespace nlayers {

enum class ErrorKind {
  InvalidArgument,
  StepBudgetExceeded,
  StepUnderflow,
  NonFiniteState,
  BracketNotFound,
  DegenerateInterval,
  OutOfInterval,
  BracketFailure,
  NoConvergence,
  SingularSystem,
  BelowEigenvalueThreshold,
  NoBracket,
  NonMonotoneOnly,
  BallNotAllowed,
  WindowExceedsDomain,
};

const char* to_string(ErrorKind kind);

class SolverError : public std::runtime_error {
 public:
  SolverError(ErrorKind kind, const std::string& message);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void raise(ErrorKind kind, const std::string& message);

}  // namespace nlayers
