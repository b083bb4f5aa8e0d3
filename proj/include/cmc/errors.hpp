#pragma once

#include <stdexcept>
#include <string>

namespace cmc {

enum class ErrorCode {
  InvalidConfig,
  GraphDegenerate,
  DegenerateMetric,
  NoCriticalLength,
  NoBifurcation,
  PoleInBracket,
  ConvergenceFailure,
  DegenerateKernel,
  NewtonDiverged,
  ContinuationStalled,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure surfaced by the library carries one of the codes above; the
// CLI maps them onto its exit-code contract.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace cmc
