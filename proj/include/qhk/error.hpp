#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qhk {

enum class ErrorCode {
  InvalidInput,
  DuplicateId,
  DanglingEndpoint,
  IllegalSection,
  DegreeMismatch,
  FixtureViolation,
  ZeroRank,
  UnsupportedRank,
  NoSubobjects,
  DimensionUnsupported,
  TooCoarse,
  TransformFailure,
  SingularMetric,
  SingularTwist,
  NotPositive,
  FixtureUnsupported,
  RankUnsupported,
  CalibrationAmbiguous,
  LinearSolveFailure,
  LineSearchFailure,
  PreconditionViolated,
  NoCollapseDetected,
  VerificationFailure,
  IoFailure,
};

const char* error_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Validation collects every problem instead of stopping at the first.
struct Issue {
  ErrorCode code;
  std::string message;
};
using IssueList = std::vector<Issue>;

}  // namespace qhk
