#include "stackelq/errors.h"

#include <cstdio>

namespace stackelq {

std::string_view ErrorName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kNotSymmetric: return "NotSymmetric";
    case ErrorCode::kNotPsd: return "NotPSD";
    case ErrorCode::kNotPd: return "NotPD";
    case ErrorCode::kNonpositiveHorizon: return "NonpositiveHorizon";
    case ErrorCode::kInvalidGrid: return "InvalidGrid";
    case ErrorCode::kNotScalar: return "NotScalar";
    case ErrorCode::kRatioMismatch: return "RatioMismatch";
    case ErrorCode::kDegenerateRatio: return "DegenerateRatio";
    case ErrorCode::kSymmetrizationFailed: return "SymmetrizationFailed";
    case ErrorCode::kBlowUp: return "BlowUp";
    case ErrorCode::kGridTooCoarse: return "GridTooCoarse";
    case ErrorCode::kRequiresDeterministic: return "RequiresDeterministic";
    case ErrorCode::kFollowerIterationDiverged:
      return "FollowerIterationDiverged";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kSingularKkt: return "SingularKKT";
    case ErrorCode::kMaxIterations: return "MaxIterations";
    case ErrorCode::kConfig: return "ConfigError";
  }
  return "Unknown";
}

SolverError::SolverError(ErrorCode code, std::string subject, double value,
                         const std::string& detail)
    : std::runtime_error(std::string(ErrorName(code)) + ": " + detail),
      code_(code),
      subject_(std::move(subject)),
      value_(value) {}

std::string SolverError::Reason() const {
  std::string out(ErrorName(code_));
  if (!subject_.empty()) out += " " + subject_;
  char buf[64];
  std::snprintf(buf, sizeof(buf), " %.17g", value_);
  out += buf;
  return out;
}

}  // namespace stackelq
