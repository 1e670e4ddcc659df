#include <gtest/gtest.h>

#include <cmath>

#include "instances.h"
#include "stackelq/augment.h"
#include "stackelq/errors.h"
#include "stackelq/riccati.h"

namespace stackelq {
namespace {

RiccatiSystem Linear() {
  RiccatiSystem sys;
  sys.A = sys.B = sys.C = MatrixXd::Zero(2, 2);
  sys.Q = (MatrixXd(2, 2) << 1, -1, 1, 0).finished();
  sys.G = (MatrixXd(2, 2) << 2, -1, 1, 0).finished();
  return sys;
}

RiccatiSystem HatOf(const GameSpec& s) {
  return HatRiccatiSystem(AssembleHat(s));
}

TEST(SolveRiccati, LinearQuadrature) {
  const RiccatiSystem sys = Linear();
  const TimeGrid grid(1.0, 1000);
  const RiccatiSolution sol = SolveRiccati(sys, grid);
  const MatrixXd expected0 = (MatrixXd(2, 2) << 3, -2, 2, 0).finished();
  EXPECT_LE((sol.at(0) - expected0).cwiseAbs().maxCoeff(), 1e-10);
  for (int k = 0; k <= grid.steps(); k += 97) {
    const MatrixXd exact = sys.G + (1.0 - grid.t(k)) * sys.Q;
    EXPECT_LE((sol.at(k) - exact).cwiseAbs().maxCoeff(), 1e-10);
  }
  EXPECT_LE(RiccatiResidual(sol, sys), 1e-8);
}

TEST(SolveRiccati, ZeroIsFixedPoint) {
  RiccatiSystem sys;
  sys.A = (MatrixXd(2, 2) << 1, 2, 3, 4).finished();
  sys.B = MatrixXd::Identity(2, 2);
  sys.C = 0.5 * MatrixXd::Identity(2, 2);
  sys.Q = sys.G = MatrixXd::Zero(2, 2);
  const RiccatiSolution sol = SolveRiccati(sys, TimeGrid(1.0, 50));
  for (const MatrixXd& k : sol.nodes()) EXPECT_TRUE(k.isZero(0));
  EXPECT_EQ(RiccatiResidual(sol, sys), 0.0);
}

TEST(SolveRiccati, FollowerFreeClosedForm) {
  const TimeGrid grid(1.0, 2000);
  const RiccatiSolution sol = SolveRiccati(HatOf(testing::FollowerFree()), grid);
  double err = 0.0;
  for (int k = 0; k <= grid.steps(); ++k) {
    err = std::max(err, std::abs(sol.at(k)(0, 0) - 1.0 / (2.0 - grid.t(k))));
    EXPECT_EQ(sol.at(k)(0, 1), 0.0);
    EXPECT_EQ(sol.at(k)(1, 0), 0.0);
    EXPECT_EQ(sol.at(k)(1, 1), 0.0);
  }
  EXPECT_LE(err, 1e-6);
  EXPECT_NEAR(sol.at(0)(0, 0), 0.5, 1e-6);
}

TEST(SolveRiccati, ResidualQuartersWithStep) {
  const RiccatiSystem sys = HatOf(testing::FollowerFree());
  const double r1 = RiccatiResidual(SolveRiccati(sys, TimeGrid(1.0, 2000)), sys);
  const double r2 = RiccatiResidual(SolveRiccati(sys, TimeGrid(1.0, 4000)), sys);
  EXPECT_LE(r1, 1e-5);
  EXPECT_NEAR(r1 / r2, 4.0, 0.2);
}

TEST(SolveRiccati, TerminalAnchoredBitForBit) {
  const RiccatiSystem sys = HatOf(testing::TwoState());
  const RiccatiSolution sol = SolveRiccati(sys, TimeGrid(1.0, 64));
  EXPECT_EQ(sol.at(64), sys.G);
}

TEST(SolveRiccati, ReferenceValues) {
  const RiccatiSolution sol =
      SolveRiccati(HatOf(testing::Reference()), TimeGrid(1.0, 1000));
  EXPECT_NEAR(sol.at(0)(0, 0), testing::kReferenceK00, 1e-9);
  EXPECT_NEAR(sol.at(0)(0, 1), testing::kReferenceK01, 1e-9);
  EXPECT_NEAR(sol.at(0)(1, 0), testing::kReferenceK10, 1e-9);
  EXPECT_NEAR(sol.at(0)(1, 1), testing::kReferenceK11, 1e-9);
}

TEST(SolveRiccati, FourthOrderRefinement) {
  const RiccatiSystem sys = HatOf(testing::TwoState());
  const MatrixXd k1 = SolveRiccati(sys, TimeGrid(1.0, 10)).at(0);
  const MatrixXd k2 = SolveRiccati(sys, TimeGrid(1.0, 20)).at(0);
  const MatrixXd k4 = SolveRiccati(sys, TimeGrid(1.0, 40)).at(0);
  const double d1 = (k1 - k2).cwiseAbs().maxCoeff();
  const double d2 = (k2 - k4).cwiseAbs().maxCoeff();
  EXPECT_GE(d1 / d2, 8.0);
}

TEST(SolveRiccati, BlowUpReportsTime) {
  // Scalar k' = -k^2 backward from k(T) = -1 escapes at t = T - 1.
  RiccatiSystem sys;
  sys.A = sys.C = sys.Q = MatrixXd::Zero(1, 1);
  sys.B = MatrixXd::Identity(1, 1);
  sys.G = -MatrixXd::Identity(1, 1);
  try {
    SolveRiccati(sys, TimeGrid(3.0, 3000));
    FAIL();
  } catch (const SolverError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBlowUp);
    EXPECT_EQ(e.subject(), "t");
    EXPECT_NEAR(e.value(), 2.0, 0.05);
  }
}

TEST(RiccatiResidual, NeedsFourSteps) {
  const RiccatiSystem sys = Linear();
  EXPECT_THROW(RiccatiResidual(SolveRiccati(sys, TimeGrid(1.0, 3)), sys),
               SolverError);
}

TEST(Tilde, SymmetricPsdAndRecovers) {
  const GameSpec s = testing::Stochastic();
  const HatSystem hat = AssembleHat(s);
  const SymmetrizedSystem sym = Symmetrize(hat, CheckSymmetrizable(s));
  const TimeGrid grid(1.0, 1000);
  const RiccatiSolution tilde =
      SolveRiccati(TildeRiccatiSystem(sym), grid, SystemTag::kTilde);
  const RiccatiSolution direct = SolveRiccati(HatRiccatiSystem(hat), grid);
  const RiccatiSolution back = RecoverFromTilde(sym, tilde);
  EXPECT_EQ(back.tag(), SystemTag::kHat);
  for (int k = 0; k <= grid.steps(); ++k) {
    EXPECT_LE(AsymmetryNorm(tilde.at(k)), 1e-10);
    EXPECT_GE(MinEigenvalue(tilde.at(k)), -1e-10);
    EXPECT_LE((back.at(k) - direct.at(k)).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(Tilde, RecoverIdentityGivesPhi) {
  const GameSpec s = testing::Reference();
  const SymmetrizedSystem sym =
      Symmetrize(AssembleHat(s), CheckSymmetrizable(s));
  const TimeGrid grid(1.0, 4);
  const std::vector<MatrixXd> ident(5, MatrixXd::Identity(2, 2));
  const RiccatiSolution k = RecoverFromTilde(
      sym, RiccatiSolution(grid, TildeRiccatiSystem(sym), SystemTag::kTilde,
                           ident));
  EXPECT_EQ(k.at(2), sym.Phi);
  const std::vector<MatrixXd> zero(5, MatrixXd::Zero(2, 2));
  const RiccatiSolution z = RecoverFromTilde(
      sym,
      RiccatiSolution(grid, TildeRiccatiSystem(sym), SystemTag::kTilde, zero));
  EXPECT_TRUE(z.at(0).isZero(0));
}

TEST(RiccatiSolution, InterpolationIsLinearBetweenNodes) {
  const RiccatiSolution sol =
      SolveRiccati(HatOf(testing::Reference()), TimeGrid(1.0, 10));
  const MatrixXd mid = sol.Interpolate(0.35);
  EXPECT_TRUE(mid.isApprox(0.5 * (sol.at(3) + sol.at(4)), 1e-14));
  EXPECT_TRUE(sol.Hermite(3, 0.0).isApprox(sol.at(3), 1e-15));
  EXPECT_TRUE(sol.Hermite(3, 1.0).isApprox(sol.at(4), 1e-15));
}

}  // namespace
}  // namespace stackelq
