#include "neumann_layers/errors.hpp"

namespace nlayers {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::StepBudgetExceeded: return "StepBudgetExceeded";
    case ErrorKind::StepUnderflow: return "StepUnderflow";
    case ErrorKind::NonFiniteState: return "NonFiniteState";
    case ErrorKind::BracketNotFound: return "BracketNotFound";
    case ErrorKind::DegenerateInterval: return "DegenerateInterval";
    case ErrorKind::OutOfInterval: return "OutOfInterval";
    case ErrorKind::BracketFailure: return "BracketFailure";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::BelowEigenvalueThreshold: return "BelowEigenvalueThreshold";
    case ErrorKind::NoBracket: return "NoBracket";
    case ErrorKind::NonMonotoneOnly: return "NonMonotoneOnly";
    case ErrorKind::BallNotAllowed: return "BallNotAllowed";
    case ErrorKind::WindowExceedsDomain: return "WindowExceedsDomain";
  }
  return "Unknown";
}

SolverError::SolverError(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void raise(ErrorKind kind, const std::string& message) { throw SolverError(kind, message); }

}  // namespace nlayers
