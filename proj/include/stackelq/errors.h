#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stackelq {

enum class ErrorCode {
  kDimensionMismatch,
  kNonFinite,
  kNotSymmetric,
  kNotPsd,
  kNotPd,
  kNonpositiveHorizon,
  kInvalidGrid,
  kNotScalar,
  kRatioMismatch,
  kDegenerateRatio,
  kSymmetrizationFailed,
  kBlowUp,
  kGridTooCoarse,
  kRequiresDeterministic,
  kFollowerIterationDiverged,
  kNoConvergence,
  kSingularKkt,
  kMaxIterations,
  kConfig,
};

// Stable identifier printed on the CLI diagnostic line, e.g. "NotPD".
std::string_view ErrorName(ErrorCode code);

// Every solver and validation failure is reported through this type. The
// optional subject names the offending matrix (or the node index for BlowUp)
// and value carries the offending number when there is one.
class SolverError : public std::runtime_error {
 public:
  SolverError(ErrorCode code, std::string subject, double value,
              const std::string& detail);
  SolverError(ErrorCode code, const std::string& detail)
      : SolverError(code, "", 0.0, detail) {}

  ErrorCode code() const { return code_; }
  const std::string& subject() const { return subject_; }
  double value() const { return value_; }

  // One-line machine-parsable summary: "<Name> <subject> <value>".
  std::string Reason() const;

 private:
  ErrorCode code_;
  std::string subject_;
  double value_;
};

}  // namespace stackelq
