#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "stackelq/core.h"
#include "stackelq/openloop.h"

namespace stackelq {

// Switching rule for the slope of the leader's affine strategy:
// -bound if delta > 0, +bound if delta < 0, and 0 on the tie delta == 0.
double Bang(double bound, double delta);

// Scalar closed-loop profile. Along the optimum y = xi x, p1 = eta x and
// p2 = zeta x, where (xi, eta, zeta) solve
//
//   xi'   = [b1 eta + b2 zeta + B1 s] xi + b2 eta,                xi(0) = 0
//   eta'  = [b1 eta + b2 zeta - 2A - C^2] eta + Q2 xi - Q1,       eta(T) = G1 - G2 xi(T)
//   zeta' = [b1 eta + b2 zeta - 2A - C^2 - B1 s] zeta - Q2,       zeta(T) = G2
//
// with b_i = B_i^2 / R_i and slope s = Bang(bound, -B1 xi zeta), recorded in
// bang[]. The integrators use the one-sided limit of s where the switching
// value vanishes identically at a node (t = 0), so only the first step sees
// the difference. The martingale
// parts eta2, zeta2 vanish for constant coefficients and are kept as zero
// paths.
struct ClosedLoopProfile {
  TimeGrid grid{1.0, 1};
  double bound = 0.0;
  std::vector<double> xi, eta, zeta, bang, eta2, zeta2;
  int iterations = 0;
  double last_update = 0.0;

  // -B1 xi zeta at node k.
  double SwitchingValue(int k, double b1) const {
    return -b1 * xi[k] * zeta[k];
  }
};

enum class ProfileMethod { kFixedPoint, kShooting };

struct ProfileOptions {
  ProfileMethod method = ProfileMethod::kFixedPoint;
  double tolerance = 1e-9;
  int max_iterations = 1000;
  double damping = 0.5;
};

inline constexpr double kDefaultBound = 1.0;

// Throws NotScalar for non-scalar games and NoConvergence when the sweeps or
// the shooting iteration stall.
ClosedLoopProfile SolveProfile(const GameSpec& spec, const TimeGrid& grid,
                               double bound, const ProfileOptions& options = {});

// Node derivatives (xi', eta', zeta') of a profile. Where the switching value
// is exactly zero (t = 0) the slope is its one-sided limit, not bang[k].
struct ProfileRates {
  std::vector<double> xi, eta, zeta;
};
ProfileRates ProfileDerivatives(const ClosedLoopProfile& profile,
                                const GameSpec& spec);

// Leader strategy u(t, x) = s(t) x + offset(t) with
// offset = -s x* - R1^-1 B1 eta x*, built on the nominal (noise-free) path x*.
// Along any realized reference x*, u(t, x*) = -R1^-1 B1 eta x*.
struct ClosedLoopLaw {
  std::shared_ptr<const ClosedLoopProfile> profile;
  std::vector<double> nominal;  // x* at nodes
  std::vector<double> slope;
  std::vector<double> offset;
  double leader_gain = 0.0;    // R1^-1 B1
  double follower_gain = 0.0;  // R2^-1 B2

  double U(int k, double x) const { return slope[k] * x + offset[k]; }
  // Same strategy anchored at a realized reference path.
  double U(int k, double x, double x_star) const {
    return slope[k] * (x - x_star) - leader_gain * profile->eta[k] * x_star;
  }
  double V(int k, double x) const {
    return -follower_gain * profile->zeta[k] * x;
  }
};

ClosedLoopLaw SynthesizeClosed(const ClosedLoopProfile& profile,
                               const GameSpec& spec, const TimeGrid& grid);

// Paths of x under the closed-loop law together with the reference x*
// driven by the same increments:
//   dx  = (A x + B1 u(t, x; x*) + B2 v) dt + C x dW,
//   dx* = (A - b1 eta - b2 zeta) x* dt + C x* dW.
class ClosedLoopEnsemble {
 public:
  ClosedLoopEnsemble(TimeGrid grid, int n_paths, std::uint64_t seed,
                     std::shared_ptr<const ClosedLoopLaw> law, double c);

  const TimeGrid& grid() const { return grid_; }
  int n_paths() const { return n_paths_; }
  std::uint64_t seed() const { return seed_; }
  const ClosedLoopLaw& law() const { return *law_; }

  double X(int path, int k) const { return x_[Index(path, k)]; }
  double XStar(int path, int k) const { return x_star_[Index(path, k)]; }
  double DeltaW(int path, int k) const { return dw_[Index(path, k)]; }
  double Y(int path, int k) const { return law_->profile->xi[k] * X(path, k); }
  double P1(int path, int k) const {
    return law_->profile->eta[k] * X(path, k);
  }
  double P2(int path, int k) const {
    return law_->profile->zeta[k] * X(path, k);
  }
  double Q1(int path, int k) const { return c_ * P1(path, k); }
  double Q2(int path, int k) const { return c_ * P2(path, k); }
  double U(int path, int k) const {
    return law_->U(k, X(path, k), XStar(path, k));
  }
  double V(int path, int k) const { return law_->V(k, X(path, k)); }

  double& MutableX(int path, int k) { return x_[Index(path, k)]; }
  double& MutableXStar(int path, int k) { return x_star_[Index(path, k)]; }
  double& MutableDeltaW(int path, int k) { return dw_[Index(path, k)]; }

 private:
  std::size_t Index(int path, int k) const {
    return static_cast<std::size_t>(path) * grid_.num_nodes() + k;
  }

  TimeGrid grid_;
  int n_paths_;
  std::uint64_t seed_;
  std::shared_ptr<const ClosedLoopLaw> law_;
  double c_;
  std::vector<double> x_, x_star_, dw_;
};

struct ClosedLoopRun {
  ClosedLoopEnsemble ensemble;
  CostEstimate costs;
};

ClosedLoopRun SimulateClosed(const ClosedLoopLaw& law, const GameSpec& spec,
                             const TimeGrid& grid, int n_paths,
                             std::uint64_t seed, int workers = 1);

// Expected costs along the closed loop through E[x^2], by RK4.
MomentCosts ClosedCostsMoment(const ClosedLoopProfile& profile,
                              const GameSpec& spec);

// Accumulated discrete defect of (y, p1, p2) = (xi, eta, zeta) x against the
// leader's Hamiltonian system along the simulated paths; RMS over paths of
// the max over nodes.
double ClosedRepresentationDefect(const ClosedLoopEnsemble& ens,
                                  const GameSpec& spec);

// H1 = p1 [(A + B1 u2) x + B1 u1 - b2 p2] + C x q1
//      - y [(A + B1 u2) p2 + C q2 + Q2 x] + (Q1 x^2 + R1 (u2 x + u1)^2) / 2
double LeaderHamiltonian(const GameSpec& spec, double u1, double u2, double x,
                         double y, double p1, double p2, double q1, double q2);

struct HamiltonianSample {
  int node = 0;
  double x = 0.0;
};

struct HamiltonianReport {
  int checked = 0;
  int degenerate = 0;
  int violations = 0;
  std::vector<int> violation_nodes;
  // max |H1(u1* + d) - H1(u1*) - R1 d^2 / 2| over samples and offsets
  double max_curvature_error = 0.0;
};

HamiltonianReport HamiltonianScan(const ClosedLoopProfile& profile,
                                  const GameSpec& spec,
                                  const std::vector<HamiltonianSample>& samples,
                                  const std::vector<double>& offsets = {
                                      1e-3, 1e-1, 1.0});

}  // namespace stackelq
