#ifndef BELLEV_ERROR_HPP
#define BELLEV_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace bellev {

enum class ErrorKind {
  InvalidArgument,
  OutOfSimplex,
  NoSignalingViolation,
  ZeroProbabilityWithCount,
  DegenerateGeometry,
  ConvergenceFailure,
  SolverFailure,
  NegativeQ,
  RangeMaximumAtBoundary,
  InsufficientRegionPoints,
  ParseError,
  TotalMismatch,
  IoError,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::OutOfSimplex: return "OutOfSimplex";
    case ErrorKind::NoSignalingViolation: return "NoSignalingViolation";
    case ErrorKind::ZeroProbabilityWithCount: return "ZeroProbabilityWithCount";
    case ErrorKind::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::SolverFailure: return "SolverFailure";
    case ErrorKind::NegativeQ: return "NegativeQ";
    case ErrorKind::RangeMaximumAtBoundary: return "RangeMaximumAtBoundary";
    case ErrorKind::InsufficientRegionPoints: return "InsufficientRegionPoints";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::TotalMismatch: return "TotalMismatch";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

/// Numerical failures (as opposed to bad input).
constexpr bool is_numerical_failure(ErrorKind kind) {
  return kind == ErrorKind::ConvergenceFailure ||
         kind == ErrorKind::SolverFailure ||
         kind == ErrorKind::RangeMaximumAtBoundary;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace bellev

#endif  // BELLEV_ERROR_HPP
