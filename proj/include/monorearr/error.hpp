#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace monorearr {

enum class ErrorCode {
  InvalidArgument,
  InvalidInterval,
  NonIncreasingBreakpoints,
  LengthMismatch,
  NonFiniteValue,
  OutOfDomain,
  InvalidExponent,
  NonConvexSample,
  NonPositiveEpsilon,
  MassMismatch,
  DisconnectedSupport,
  TransportMismatch,
  CriticalLevel,
  FlatTransport,
  IncompatibleProfile,
  InequalityViolated,
  FlatPiecePresent,
  NotNonInjective,
  NonInvertibleCost,
  DepthExceeded,
  ProbeAtCriticalLevel,
  NonPositiveJ,
  GridMismatch,
  ParseError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidInterval: return "InvalidInterval";
    case ErrorCode::NonIncreasingBreakpoints: return "NonIncreasingBreakpoints";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::InvalidExponent: return "InvalidExponent";
    case ErrorCode::NonConvexSample: return "NonConvexSample";
    case ErrorCode::NonPositiveEpsilon: return "NonPositiveEpsilon";
    case ErrorCode::MassMismatch: return "MassMismatch";
    case ErrorCode::DisconnectedSupport: return "DisconnectedSupport";
    case ErrorCode::TransportMismatch: return "TransportMismatch";
    case ErrorCode::CriticalLevel: return "CriticalLevel";
    case ErrorCode::FlatTransport: return "FlatTransport";
    case ErrorCode::IncompatibleProfile: return "IncompatibleProfile";
    case ErrorCode::InequalityViolated: return "InequalityViolated";
    case ErrorCode::FlatPiecePresent: return "FlatPiecePresent";
    case ErrorCode::NotNonInjective: return "NotNonInjective";
    case ErrorCode::NonInvertibleCost: return "NonInvertibleCost";
    case ErrorCode::DepthExceeded: return "DepthExceeded";
    case ErrorCode::ProbeAtCriticalLevel: return "ProbeAtCriticalLevel";
    case ErrorCode::NonPositiveJ: return "NonPositiveJ";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace monorearr
