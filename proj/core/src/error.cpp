#include "alphacf/error.hpp"

namespace alphacf {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ZeroArgument: return "ZeroArgument";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::Breakpoint: return "Breakpoint";
    case ErrorCode::EmptyCylinder: return "EmptyCylinder";
    case ErrorCode::DivergentRemainder: return "DivergentRemainder";
    case ErrorCode::PatternExhausted: return "PatternExhausted";
    case ErrorCode::UnsupportedAlpha: return "UnsupportedAlpha";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::OrbitHitZero: return "OrbitHitZero";
    case ErrorCode::RejectionStarvation: return "RejectionStarvation";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace alphacf
