#include <gtest/gtest.h>

#include <cmath>

#include "instances.h"
#include "stackelq/augment.h"
#include "stackelq/errors.h"

namespace stackelq {
namespace {

MatrixXd M2(double a, double b, double c, double d) {
  return (MatrixXd(2, 2) << a, b, c, d).finished();
}

TEST(AssembleHat, BlockSubstitution) {
  const HatSystem h =
      AssembleHat(GameSpec::Scalar(0, 1, 1, 0, 0, 0, 1, 1, 0, 0, 1, 1));
  EXPECT_EQ(h.Bhat, M2(1, 1, -1, 0));
  EXPECT_TRUE(h.Ahat.isZero(0));
  EXPECT_TRUE(h.Chat.isZero(0));
  EXPECT_TRUE(h.Qhat.isZero(0));
  EXPECT_TRUE(h.Ghat.isZero(0));
}

TEST(AssembleHat, FollowerBlocksVanish) {
  const HatSystem h =
      AssembleHat(GameSpec::Scalar(0, 1, 0, 0, 3, 0, 1, 1, 5, 0, 1, 1));
  EXPECT_EQ(h.Bhat, M2(1, 0, 0, 0));
  EXPECT_EQ(h.Qhat, M2(3, 0, 0, 0));
  EXPECT_EQ(h.Ghat, M2(5, 0, 0, 0));
}

TEST(AssembleHat, DiagonalBlocks) {
  const HatSystem h =
      AssembleHat(GameSpec::Scalar(1, 1, 1, 2, 1, 1, 1, 1, 1, 1, 1, 1));
  EXPECT_EQ(h.Ahat, M2(1, 0, 0, 1));
  EXPECT_EQ(h.Chat, M2(2, 0, 0, 2));
}

TEST(AssembleHat, TwoStateLayout) {
  const GameSpec s = testing::TwoState();
  const HatSystem h = AssembleHat(s);
  const MatrixXd s2 = s.B2 * s.R2.inverse() * s.B2.transpose();
  EXPECT_EQ(h.Bhat.rows(), 4);
  EXPECT_TRUE(h.Bhat.bottomLeftCorner(2, 2).isApprox(-s2));
  EXPECT_TRUE(h.Bhat.bottomRightCorner(2, 2).isZero(0));
  EXPECT_EQ(h.Qhat.topRightCorner(2, 2), -s.Q2);
  EXPECT_EQ(h.Ghat.bottomLeftCorner(2, 2), s.G2);
}

TEST(CheckSymmetrizable, DirectRatios) {
  const SymmetrizingRatios r =
      CheckSymmetrizable(GameSpec::Scalar(0, 1, 2, 0, 2, 1, 1, 2, 4, 2, 1, 1));
  EXPECT_DOUBLE_EQ(r.alpha, 0.5);
  EXPECT_DOUBLE_EQ(r.beta, 2.0);
}

TEST(CheckSymmetrizable, Rejections) {
  auto code = [](const GameSpec& s) {
    try {
      CheckSymmetrizable(s);
    } catch (const SolverError& e) {
      return e.code();
    }
    return ErrorCode::kConfig;
  };
  EXPECT_EQ(code(GameSpec::Scalar(0, 1, 1, 0, 1, 1, 1, 1, 1, 2, 1, 1)),
            ErrorCode::kRatioMismatch);
  EXPECT_EQ(code(GameSpec::Scalar(0, 1, 1, 0, 0, 1, 1, 1, 1, 1, 1, 1)),
            ErrorCode::kDegenerateRatio);
  EXPECT_EQ(code(testing::TwoState()), ErrorCode::kNotScalar);
}

TEST(Symmetrize, ReferenceMatrices) {
  const GameSpec s = testing::Reference();
  const HatSystem hat = AssembleHat(s);
  const SymmetrizedSystem sym = Symmetrize(hat, CheckSymmetrizable(s));
  EXPECT_TRUE(sym.Btilde.isApprox(M2(1.5, -0.5, -0.5, 0.5), 1e-15));
  EXPECT_LE((sym.Btilde - hat.Bhat * sym.Phi).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_TRUE(sym.Qtilde.isApprox(0.5 * M2(1.5, -0.5, -0.5, 0.5), 1e-15));
  EXPECT_LE((sym.Phi * sym.PhiInv - MatrixXd::Identity(2, 2))
                .cwiseAbs()
                .maxCoeff(),
            1e-15);
  EXPECT_LE(AsymmetryNorm(sym.Gtilde), 1e-12);
  EXPECT_GE(MinEigenvalue(sym.Gtilde), -1e-10);
}

TEST(Symmetrize, SymmetricUnderRatioConditions) {
  // Sweep of ratio instances; the identities hold exactly.
  for (double alpha : {0.1, 0.5, 2.0}) {
    for (double beta : {0.25, 1.0, 3.0}) {
      const double q1 = 1.3, g1 = 0.7;
      const GameSpec s = GameSpec::Scalar(0.2, 1.0, std::sqrt(beta), 0.1, q1,
                                          alpha * q1, 1.0, 1.0, g1, alpha * g1,
                                          1.0, 1.0);
      const SymmetrizedSystem sym =
          Symmetrize(AssembleHat(s), CheckSymmetrizable(s));
      EXPECT_LE(AsymmetryNorm(sym.Btilde), 1e-12);
      EXPECT_LE(AsymmetryNorm(sym.Qtilde), 1e-12);
      EXPECT_LE(AsymmetryNorm(sym.Gtilde), 1e-12);
      EXPECT_GT(sym.Phi.determinant(), 0.0);
    }
  }
}

TEST(Symmetrize, FailsWhenRatiosAreWrong) {
  const GameSpec s = testing::Reference();
  EXPECT_THROW(Symmetrize(AssembleHat(s), SymmetrizingRatios{0.3, 0.5}),
               SolverError);
}

}  // namespace
}  // namespace stackelq
