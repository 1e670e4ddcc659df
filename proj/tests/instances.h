#pragma once

#include "stackelq/core.h"

namespace stackelq::testing {

// a, b1, b2, c, q1, q2, r1, r2, g1, g2, T, x0

// Single-player limit; K11(t) = 1 / (2 - t).
inline GameSpec FollowerFree() {
  return GameSpec::Scalar(0, 1, 0, 0, 0, 0, 1, 1, 1, 0, 1, 1);
}

// Two-player scalar game satisfying the ratio conditions with
// alpha = Q2/Q1 = G2/G1 = 0.5 and beta = b2/b1 = 0.5.
inline GameSpec Reference() {
  return GameSpec::Scalar(0.5, 1, 1, 0, 1, 0.5, 1, 2, 2, 1, 1, 1);
}

inline GameSpec Stochastic() {
  return GameSpec::Scalar(0.5, 1, 1, 0.3, 1, 0.5, 1, 2, 2, 1, 1, 1);
}

// Two-state game with a non-scalar follower.
inline GameSpec TwoState() {
  GameSpec s;
  s.A = (MatrixXd(2, 2) << 0.0, 1.0, -0.5, 0.2).finished();
  s.B1 = (MatrixXd(2, 1) << 0.0, 1.0).finished();
  s.B2 = (MatrixXd(2, 1) << 1.0, 0.5).finished();
  s.C = MatrixXd::Zero(2, 2);
  s.Q1 = MatrixXd::Identity(2, 2);
  s.Q2 = (MatrixXd(2, 2) << 0.5, 0.1, 0.1, 0.3).finished();
  s.R1 = MatrixXd::Identity(1, 1);
  s.R2 = 2.0 * MatrixXd::Identity(1, 1);
  s.G1 = MatrixXd::Identity(2, 2);
  s.G2 = 0.5 * MatrixXd::Identity(2, 2);
  s.T = 1.0;
  s.x0 = (VectorXd(2) << 1.0, -0.5).finished();
  return s;
}

// Values from an independent adaptive (DOP853, rtol 1e-12) solve.
inline constexpr double kReferenceK00 = 1.1321276524;
inline constexpr double kReferenceK01 = -0.9965218516;
inline constexpr double kReferenceK10 = 0.9965218516;
inline constexpr double kReferenceK11 = 0.8609160508;
inline constexpr double kReferenceJ1 = 0.5660638262;
inline constexpr double kReferenceJ2 = 0.2805505832;
// Closed loop, K_b = 1.
inline constexpr double kClosedEta0 = 0.8314104144;
inline constexpr double kClosedZeta0 = 2.2266603754;
inline constexpr double kClosedJ1 = 0.4157052072;
inline constexpr double kClosedJ2 = 0.5022094038;

}  // namespace stackelq::testing
