#pragma once

#include <vector>

#include "stackelq/core.h"

namespace stackelq {

// Explicit-Euler transcription of a deterministic game:
//   x_{k+1} = (I + hA) x_k + h B1 u_k + h B2 v_k,
//   J_i = sum_{k<N} h/2 (x_k'Q_i x_k + ctrl_k'R_i ctrl_k) + x_N'G_i x_N / 2.
//
// The follower's exact best response to any leader sequence is an affine map
// of u. It is carried in feedback form: with Ab = I + hA, Bb = h B2,
//   P_N = G2,  M_k = h R2 + Bb'P_{k+1}Bb,  F_k = M_k^-1 Bb'P_{k+1}Ab,
//   Gamma_k = Ab - Bb F_k,  P_k = h Q2 + Ab'P_{k+1}Gamma_k,
//   E_k = Bb M_k^-1 Bb'.
class DiscreteGame {
 public:
  // Throws RequiresDeterministic when C != 0 and SingularKKT when some M_k
  // is not positive definite.
  DiscreteGame(const GameSpec& spec, const TimeGrid& grid);

  const GameSpec& spec() const { return spec_; }
  const TimeGrid& grid() const { return grid_; }
  int steps() const { return grid_.steps(); }

  const MatrixXd& P(int k) const { return p_[k]; }
  const MatrixXd& Gain(int k) const { return f_[k]; }
  const MatrixXd& Gamma(int k) const { return gamma_[k]; }
  const MatrixXd& E(int k) const { return e_[k]; }
  // M_k^-1 Bb'
  const MatrixXd& MinvBt(int k) const { return minv_bt_[k]; }

 private:
  GameSpec spec_;
  TimeGrid grid_;
  std::vector<MatrixXd> p_, f_, gamma_, e_, minv_bt_;
};

using ControlPath = std::vector<VectorXd>;  // N entries

struct FollowerSolution {
  std::vector<VectorXd> x;  // N + 1 states
  ControlPath v;
  double J1 = 0.0, J2 = 0.0;
};

// Exact minimizer of the discrete J2 over v for the given leader sequence,
// by one backward pass for the affine offset and one forward pass.
FollowerSolution FollowerBestResponse(const ControlPath& u,
                                      const DiscreteGame& game);

double DiscreteCost(const std::vector<VectorXd>& x, const ControlPath& ctrl,
                    const MatrixXd& q, const MatrixXd& r, const MatrixXd& g,
                    double h);

// u -> J1(u, follower_br(u)).
double ReducedObjective(const ControlPath& u, const DiscreteGame& game);

// Gradient of the reduced objective through the adjoint of the composite
// map. With zero_initial_state the affine part from x0 is dropped, which
// turns the gradient into the Hessian action.
ControlPath ReducedGradient(const ControlPath& u, const DiscreteGame& game,
                            bool zero_initial_state = false);

struct LeaderOptions {
  double tolerance = 1e-10;
  int max_iterations = 0;  // 0: 4 * (number of unknowns) + 100
};

struct LeaderSolution {
  ControlPath u;
  FollowerSolution follower;
  double J1 = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
};

// Conjugate gradients on the reduced quadratic; stops once the Euclidean
// norm of the stacked gradient is below tolerance. Throws MaxIterations.
LeaderSolution LeaderSolve(const DiscreteGame& game,
                           const LeaderOptions& options = {});

struct ConvergenceRow {
  int N = 0;
  double J1_disc = 0.0;
  double J1_cont = 0.0;
  double abs_err = 0.0;
  double control_gap = 0.0;  // sup_k |u_disc_k - u*(t_k)|
  double order = 0.0;        // NaN on the first row or with a zero error
};

// One row per N. J1_cont and u* come from the RK4 Riccati pipeline on the
// same grid. Rows are computed in parallel across N.
std::vector<ConvergenceRow> ConvergenceReport(const GameSpec& spec,
                                              const std::vector<int>& n_list,
                                              int workers = 1);

}  // namespace stackelq
