#pragma once

#include <string>
#include <vector>

#include "stackelq/config.h"

namespace stackelq {

struct CheckResult {
  std::string name;
  bool passed = false;
  bool skipped = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string note;
};

// Invariant suite on the configured instance: Riccati residual and its
// order, terminal conditions of the simulated costates, symmetrization
// (scalar ratio instances), stationarity and convexity probes (C = 0), cost
// cross-validation, the discrete oracle (C = 0) and the closed-loop checks
// (scalar games). Solver failures propagate as SolverError.
std::vector<CheckResult> RunVerification(const RunConfig& config);

}  // namespace stackelq
