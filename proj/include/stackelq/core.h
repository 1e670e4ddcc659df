#pragma once

#include <Eigen/Dense>

namespace stackelq {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kSymmetryTolerance = 1e-12;
inline constexpr double kPsdTolerance = -1e-10;
inline constexpr double kPdFloor = 1e-8;

// Coefficients of the linear-quadratic leader/follower game
//
//   dx = (A x + B1 u + B2 v) dt + C x dW,   x(0) = x0,
//   J_i = 1/2 E[ int_0^T (x'Q_i x + ctrl'R_i ctrl) dt + x(T)'G_i x(T) ],
//
// with player 1 the leader (control u) and player 2 the follower (control v).
// All coefficients are constant in time and the Brownian motion is scalar.
struct GameSpec {
  MatrixXd A, B1, B2, C;
  MatrixXd Q1, Q2, R1, R2, G1, G2;
  double T = 1.0;
  VectorXd x0;

  int n() const { return static_cast<int>(A.rows()); }
  int m1() const { return static_cast<int>(B1.cols()); }
  int m2() const { return static_cast<int>(B2.cols()); }
  bool IsDeterministic() const { return C.isZero(0.0); }
  bool IsScalar() const { return n() == 1 && m1() == 1 && m2() == 1; }

  // Scalar instance convenience; every coefficient becomes a 1x1 matrix.
  static GameSpec Scalar(double a, double b1, double b2, double c, double q1,
                         double q2, double r1, double r2, double g1, double g2,
                         double horizon, double x0);
};

// Checks dimensions, finiteness, symmetry, semidefiniteness of Q/G, uniform
// definiteness of R and T > 0. Weight matrices whose asymmetry is within
// kSymmetryTolerance are returned symmetrized. Throws SolverError.
GameSpec ValidateSpec(const GameSpec& raw);

// Uniform grid t_k = k T / N, k = 0..N, with t_N == T exactly.
class TimeGrid {
 public:
  TimeGrid(double horizon, int steps);

  int steps() const { return steps_; }
  double horizon() const { return horizon_; }
  double step() const { return step_; }
  double t(int k) const;
  int num_nodes() const { return steps_ + 1; }

 private:
  double horizon_;
  int steps_;
  double step_;
};

// Largest absolute entry of m - m'.
double AsymmetryNorm(const MatrixXd& m);

// Smallest eigenvalue of the symmetric part of m.
double MinEigenvalue(const MatrixXd& m);

// Top-left embedding of an n x n block into a zero 2n x 2n matrix.
MatrixXd EmbedTopLeft(const MatrixXd& block);

}  // namespace stackelq
