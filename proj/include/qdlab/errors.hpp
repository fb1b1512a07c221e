#pragma once

#include <stdexcept>
#include <string>

namespace qdlab {

/// Error identifiers used across the library. Each maps one-to-one onto a
/// failure mode named in the module contracts.
enum class ErrorCode {
  kPointOutsideDomain,
  kEvaluationAtPuncture,
  kMapNotConverged,
  kQuadratureNotConverged,
  kDomainMismatch,
  kZeroOnChartBoundary,
  kBranchContinuationFailure,
  kArcExitsDomain,
  kClassSpecInvalid,
  kGridTooCoarse,
  kStartAtZero,
  kStepCollapse,
  kZeroOnBoundary,
  kNotACrosscut,
  kInterleavingWithinLamination,
  kAmbientMismatch,
  kExcessiveUnassignedMass,
  kParameterSolverDivergence,
  kGridDegenerate,
  kRegionsOverlap,
  kFamilyNotRepresentable,
  kConfigurationInvalid,
  kBadInput,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace qdlab
