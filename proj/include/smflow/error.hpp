#pragma once

#include <stdexcept>
#include <string>

namespace smflow {

/// Failure categories raised by the library. The CLI maps these onto exit codes.
enum class ErrorKind {
  NonPositiveMetric,
  JetInconsistency,
  NonRealCurvature,
  NewtonDivergence,
  DegenerateMap,
  ChartExit,
  NaNDetected,
  BoundaryMass,
  InsufficientSampling,
  DegenerateFit,
  QuadratureFailure,
  ParseError,
  InvalidArgument,
  Io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonPositiveMetric: return "NonPositiveMetric";
    case ErrorKind::JetInconsistency: return "JetInconsistency";
    case ErrorKind::NonRealCurvature: return "NonRealCurvature";
    case ErrorKind::NewtonDivergence: return "NewtonDivergence";
    case ErrorKind::DegenerateMap: return "DegenerateMap";
    case ErrorKind::ChartExit: return "ChartExit";
    case ErrorKind::NaNDetected: return "NaNDetected";
    case ErrorKind::BoundaryMass: return "BoundaryMass";
    case ErrorKind::InsufficientSampling: return "InsufficientSampling";
    case ErrorKind::DegenerateFit: return "DegenerateFit";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), message_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// what() without the kind prefix.
  const std::string& message() const noexcept { return message_; }

  /// True for failures of the numerical integration itself (chart exit, NaN, truncation).
  bool is_numeric_abort() const noexcept {
    return kind_ == ErrorKind::ChartExit || kind_ == ErrorKind::NaNDetected ||
           kind_ == ErrorKind::BoundaryMass || kind_ == ErrorKind::NewtonDivergence;
  }

 private:
  ErrorKind kind_;
  std::string message_;
};

/// Integration failure carrying the simulation time at which it happened.
class EvolutionError : public Error {
 public:
  EvolutionError(ErrorKind kind, double time, const std::string& what)
      : Error(kind, what + " (t=" + std::to_string(time) + ")"), time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace smflow
