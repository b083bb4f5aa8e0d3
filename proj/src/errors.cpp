#include "cmc/errors.hpp"

namespace cmc {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::GraphDegenerate: return "GraphDegenerate";
    case ErrorCode::DegenerateMetric: return "DegenerateMetric";
    case ErrorCode::NoCriticalLength: return "NoCriticalLength";
    case ErrorCode::NoBifurcation: return "NoBifurcation";
    case ErrorCode::PoleInBracket: return "PoleInBracket";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::DegenerateKernel: return "DegenerateKernel";
    case ErrorCode::NewtonDiverged: return "NewtonDiverged";
    case ErrorCode::ContinuationStalled: return "ContinuationStalled";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace cmc
