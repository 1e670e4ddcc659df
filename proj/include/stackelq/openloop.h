#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "stackelq/augment.h"
#include "stackelq/core.h"
#include "stackelq/riccati.h"

namespace stackelq {

// Open-loop Stackelberg pair in feedback form on the stacked state
// xh = (x, y):  u = -R1^-1 B1' [K xh]_top,  v = -R2^-1 B2' [K xh]_bottom.
//
// u_offset, when non-empty, adds an open-loop term to the leader's control
// (one entry per node). It is zero for the synthesized optimum and exists so
// that non-optimal leader controls can be simulated through the same path.
struct FeedbackLaw {
  std::shared_ptr<const RiccatiSolution> riccati;
  std::vector<MatrixXd> u_gain;  // m1 x 2n per node
  std::vector<MatrixXd> v_gain;  // m2 x 2n per node
  std::vector<VectorXd> u_offset;

  VectorXd U(int k, const VectorXd& xh) const;
  VectorXd V(int k, const VectorXd& xh) const;
};

FeedbackLaw Synthesize(const RiccatiSolution& sol, const GameSpec& spec);

// Euler-Maruyama paths of the stacked state together with the increments
// that drove them. Costates and controls are reconstructed from the law:
// ph = K xh, qh = K Chat xh.
class TrajectoryEnsemble {
 public:
  TrajectoryEnsemble(TimeGrid grid, int n_paths, std::uint64_t seed,
                     std::shared_ptr<const FeedbackLaw> law, MatrixXd chat);

  const TimeGrid& grid() const { return grid_; }
  int n_paths() const { return n_paths_; }
  std::uint64_t seed() const { return seed_; }
  int state_dim() const { return dim_ / 2; }
  const FeedbackLaw& law() const { return *law_; }

  Eigen::Map<const VectorXd> XHat(int path, int k) const;
  Eigen::Map<VectorXd> MutableXHat(int path, int k);
  VectorXd X(int path, int k) const { return XHat(path, k).head(dim_ / 2); }
  VectorXd Y(int path, int k) const { return XHat(path, k).tail(dim_ / 2); }
  VectorXd PHat(int path, int k) const;
  VectorXd QHat(int path, int k) const;
  VectorXd U(int path, int k) const { return law_->U(k, XHat(path, k)); }
  VectorXd V(int path, int k) const { return law_->V(k, XHat(path, k)); }
  double DeltaW(int path, int k) const { return dw_[Index(path, k)]; }
  double& MutableDeltaW(int path, int k) { return dw_[Index(path, k)]; }

 private:
  std::size_t Index(int path, int k) const {
    return static_cast<std::size_t>(path) * grid_.num_nodes() + k;
  }

  TimeGrid grid_;
  int n_paths_;
  std::uint64_t seed_;
  int dim_;
  std::shared_ptr<const FeedbackLaw> law_;
  MatrixXd chat_;
  std::vector<double> xhat_;
  std::vector<double> dw_;
};

// x_{k+1} = x_k + h (Ahat - Bhat K_k) x_k + Chat x_k dW_k, with dW_k drawn from
// (seed, path, k). The result does not depend on the number of workers.
TrajectoryEnsemble Simulate(const FeedbackLaw& law, const GameSpec& spec,
                            const TimeGrid& grid, int n_paths,
                            std::uint64_t seed, int workers = 1);

struct CostEstimate {
  double J1 = 0.0, J2 = 0.0;
  double se1 = 0.0, se2 = 0.0;
  int n_paths = 0;
};

// Per-path costs by the trapezoidal rule, averaged in ascending path order.
struct PathCosts {
  double J1 = 0.0, J2 = 0.0;
};
std::vector<PathCosts> PathCostsOf(const TrajectoryEnsemble& ens,
                                   const GameSpec& spec, int workers = 1);
CostEstimate Summarize(const std::vector<PathCosts>& per_path);
CostEstimate CostsMc(const TrajectoryEnsemble& ens, const GameSpec& spec,
                     int workers = 1);

struct MomentCosts {
  double J1 = 0.0, J2 = 0.0;
};

// Exact-expectation costs through the second moment S = E[xh xh'],
//   S' = M S + S M' + Chat S Chat',  M = Ahat - Bhat K,
// integrated by RK4 together with the running costs.
MomentCosts CostsMoment(const RiccatiSolution& sol, const GameSpec& spec,
                        const TimeGrid& grid);

// Mean of the stacked state, (d/dt) E[xh] = (Ahat - Bhat K) E[xh], by RK4.
// For C = 0 this is the deterministic optimal path.
std::vector<VectorXd> MeanPath(const RiccatiSolution& sol,
                               const GameSpec& spec);

enum class AdjointSource {
  kRiccati,      // p1 = [K xh]_top, the synthesis identity
  kIndependent,  // p1 integrated backward along the simulated (x, y); C = 0
};

// L2-in-(t, omega) norm of R1 u + B1' p1 along the ensemble.
double GradientResidual(const TrajectoryEnsemble& ens, const GameSpec& spec,
                        AdjointSource source);

// Root-mean-square over paths of max_k |E_k|, where E_k is the accumulated
// mismatch between ph_k and the Euler-discretized backward equation
// integrated from ph_N.
double BackwardDefect(const TrajectoryEnsemble& ens, const GameSpec& spec);

// Follower two-point problem for a fixed leader control path (C = 0):
//   x_{k+1} = x_k + h (A x_k + B1 u_k - B2 R2^-1 B2' p_k),  x_0 = x0,
//   p_k = p_{k+1} + h (A' p_{k+1} + Q2 x_{k+1}),           p_N = G2 x_N,
// by damped backward-forward sweeps.
struct SweepOptions {
  double damping = 0.5;
  int max_sweeps = 500;
  double tolerance = 1e-10;
};

struct FollowerResponse {
  std::vector<VectorXd> x, p2, v;
  int sweeps = 0;
};

FollowerResponse SolveFollowerSweeps(const std::vector<VectorXd>& u_path,
                                     const GameSpec& spec,
                                     const TimeGrid& grid,
                                     const SweepOptions& options = {});

// Sup-norm gap between the follower control recomputed by sweeps against the
// hat-system leader control and the hat-system follower control itself.
double FollowerResponseCheck(const FeedbackLaw& law, const GameSpec& spec,
                             const TimeGrid& grid,
                             const SweepOptions& options = {});

struct ProbeSample {
  int direction = 0;
  double eps = 0.0;
  double delta_j1 = 0.0;  // J1(u* + eps w) - J1(u*)
};

struct ProbeReport {
  std::vector<ProbeSample> samples;
  double min_delta = 0.0;
};

struct ProbeOptions {
  int directions = 20;
  std::vector<double> eps{1e-2, 1e-1};
  int n_paths = 1;  // stochastic instances only
  SweepOptions sweeps;
  int workers = 1;
};

// Re-evaluates the leader cost under u = u* + eps w for random piecewise
// constant w, with the follower best-responding. Deterministic instances use
// the damped sweeps; stochastic ones the follower's own Riccati feedback plus
// its backward offset driven by w. All evaluations share the Brownian
// increments and, per direction, the same w.
ProbeReport PerturbationProbe(const FeedbackLaw& law, const GameSpec& spec,
                              const TimeGrid& grid, std::uint64_t seed,
                              const ProbeOptions& options = {});

}  // namespace stackelq
