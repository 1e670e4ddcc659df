#pragma once

#include <cmath>

namespace stackelq::internal {

// Welford accumulation in call order; identical samples give exactly zero
// spread.
class RunningMean {
 public:
  void Add(double x) {
    ++count_;
    const double delta = x - mean_;
    mean_ += delta / count_;
    m2_ += delta * (x - mean_);
  }
  double mean() const { return mean_; }
  double StandardError() const {
    if (count_ < 2) return 0.0;
    return std::sqrt(m2_ / (count_ - 1) / count_);
  }

 private:
  long count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

// Trapezoid weight of node k on an N-step grid.
inline double TrapezoidWeight(int k, int steps, double h) {
  return (k == 0 || k == steps) ? 0.5 * h : h;
}

}  // namespace stackelq::internal
