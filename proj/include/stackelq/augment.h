#pragma once

#include "stackelq/core.h"

namespace stackelq {

// The leader's problem written on the stacked state (x, y) and costate
// (p1, p2):
//
//   d xh = (Ahat xh - Bhat ph) dt + Chat xh dW,
//   d ph = -(Ahat' ph + Chat' qh + Qhat xh) dt + qh dW,   ph(T) = Ghat xh(T).
//
// Bhat, Qhat and Ghat are not symmetric in general.
struct HatSystem {
  MatrixXd Ahat, Bhat, Chat, Qhat, Ghat;
};

HatSystem AssembleHat(const GameSpec& spec);

struct SymmetrizingRatios {
  double alpha = 0.0;  // Q2/Q1 = G2/G1
  double beta = 0.0;   // (B2^2/R2) / (B1^2/R1)
};

// Image of a scalar hat system under ph = Phi pt with
// Phi = [[1, -2 beta], [2 alpha, 1]]. Btilde = Bhat Phi,
// Qtilde = Phi^-1 Qhat and Gtilde = Phi^-1 Ghat are symmetric PSD, so the
// transformed Riccati equation is a standard one.
struct SymmetrizedSystem {
  SymmetrizingRatios ratios;
  MatrixXd Phi, PhiInv;
  MatrixXd Atilde, Btilde, Ctilde, Qtilde, Gtilde;
};

inline constexpr double kRatioTolerance = 1e-10;

// Only defined for n = 1. Throws NotScalar, DegenerateRatio or RatioMismatch.
SymmetrizingRatios CheckSymmetrizable(const GameSpec& spec);

// Throws SymmetrizationFailed when the transformed weights are not symmetric
// PSD, which happens only if the ratio conditions did not actually hold.
SymmetrizedSystem Symmetrize(const HatSystem& hat,
                             const SymmetrizingRatios& ratios);

}  // namespace stackelq
