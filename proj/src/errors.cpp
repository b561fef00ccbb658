#include "mechd/errors.hpp"

namespace mechd {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonMonotoneWeight: return "NonMonotoneWeight";
    case ErrorCode::NonConcaveUtility: return "NonConcaveUtility";
    case ErrorCode::InvalidSupport: return "InvalidSupport";
    case ErrorCode::DensityNotPositive: return "DensityNotPositive";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::MuOutOfRange: return "MuOutOfRange";
    case ErrorCode::NoFeasibleMu: return "NoFeasibleMu";
    case ErrorCode::NonMonotoneAllocation: return "NonMonotoneAllocation";
    case ErrorCode::KappaOutOfRange: return "KappaOutOfRange";
    case ErrorCode::MaxIterations: return "MaxIterations";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace mechd
