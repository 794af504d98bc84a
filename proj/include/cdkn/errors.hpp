#ifndef CDKN_ERRORS_HPP
#define CDKN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cdkn {

/// Error categories raised by the library. The CLI maps each kind onto an exit code.
enum class ErrorKind {
  Domain,
  EmptyChainSet,
  OffGridTime,
  ResolutionMismatch,
  SolverFailure,
  SizeLimit,
  ZeroMassRestriction,
  UnsupportedCurvature,
  PreconditionViolated,
  NotAnUpperGradient,
  InsideBallViolation,
  NoBranchingFound,
  GridTooCoarse,
  ParseError,
  MetricError,
  DisconnectedGraph,
  UnknownExample,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Domain: return "DomainError";
    case ErrorKind::EmptyChainSet: return "EmptyChainSet";
    case ErrorKind::OffGridTime: return "OffGridTime";
    case ErrorKind::ResolutionMismatch: return "ResolutionMismatch";
    case ErrorKind::SolverFailure: return "SolverFailure";
    case ErrorKind::SizeLimit: return "SizeLimit";
    case ErrorKind::ZeroMassRestriction: return "ZeroMassRestriction";
    case ErrorKind::UnsupportedCurvature: return "UnsupportedCurvature";
    case ErrorKind::PreconditionViolated: return "PreconditionViolated";
    case ErrorKind::NotAnUpperGradient: return "NotAnUpperGradient";
    case ErrorKind::InsideBallViolation: return "InsideBallViolation";
    case ErrorKind::NoBranchingFound: return "NoBranchingFound";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::MetricError: return "MetricError";
    case ErrorKind::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorKind::UnknownExample: return "UnknownExample";
  }
  return "Error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace cdkn

#endif  // CDKN_ERRORS_HPP
