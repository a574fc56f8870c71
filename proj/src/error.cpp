#include "qhk/error.hpp"

namespace qhk {

const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::DanglingEndpoint: return "DanglingEndpoint";
    case ErrorCode::IllegalSection: return "IllegalSection";
    case ErrorCode::DegreeMismatch: return "DegreeMismatch";
    case ErrorCode::FixtureViolation: return "FixtureViolation";
    case ErrorCode::ZeroRank: return "ZeroRank";
    case ErrorCode::UnsupportedRank: return "UnsupportedRank";
    case ErrorCode::NoSubobjects: return "NoSubobjects";
    case ErrorCode::DimensionUnsupported: return "DimensionUnsupported";
    case ErrorCode::TooCoarse: return "TooCoarse";
    case ErrorCode::TransformFailure: return "TransformFailure";
    case ErrorCode::SingularMetric: return "SingularMetric";
    case ErrorCode::SingularTwist: return "SingularTwist";
    case ErrorCode::NotPositive: return "NotPositive";
    case ErrorCode::FixtureUnsupported: return "FixtureUnsupported";
    case ErrorCode::RankUnsupported: return "RankUnsupported";
    case ErrorCode::CalibrationAmbiguous: return "CalibrationAmbiguous";
    case ErrorCode::LinearSolveFailure: return "LinearSolveFailure";
    case ErrorCode::LineSearchFailure: return "LineSearchFailure";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::NoCollapseDetected: return "NoCollapseDetected";
    case ErrorCode::VerificationFailure: return "VerificationFailure";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

}  // namespace qhk
