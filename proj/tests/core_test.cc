#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "instances.h"
#include "stackelq/core.h"
#include "stackelq/errors.h"

namespace stackelq {
namespace {

GameSpec Accepted() {
  return GameSpec::Scalar(0, 1, 1, 0, 1, 1, 1, 1, 1, 1, 1, 1);
}

ErrorCode CodeOf(const GameSpec& s) {
  try {
    ValidateSpec(s);
  } catch (const SolverError& e) {
    return e.code();
  }
  ADD_FAILURE() << "spec was accepted";
  return ErrorCode::kConfig;
}

TEST(ValidateSpec, AcceptsScalarInstance) {
  const GameSpec v = ValidateSpec(Accepted());
  EXPECT_EQ(v.n(), 1);
  EXPECT_TRUE(v.IsDeterministic());
  EXPECT_TRUE(v.IsScalar());
}

TEST(ValidateSpec, RejectsSingularFollowerWeight) {
  GameSpec s = Accepted();
  s.R2(0, 0) = 0.0;
  try {
    ValidateSpec(s);
    FAIL();
  } catch (const SolverError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotPd);
    EXPECT_EQ(e.subject(), "R2");
    EXPECT_EQ(e.value(), 0.0);
    EXPECT_EQ(e.Reason().rfind("NotPD R2", 0), 0u);
  }
}

TEST(ValidateSpec, RejectsIndefiniteStateWeight) {
  GameSpec s = testing::TwoState();
  s.Q1 = (MatrixXd(2, 2) << 1, 2, 2, 1).finished();
  try {
    ValidateSpec(s);
    FAIL();
  } catch (const SolverError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotPsd);
    EXPECT_EQ(e.subject(), "Q1");
    EXPECT_NEAR(e.value(), -1.0, 1e-12);
  }
}

TEST(ValidateSpec, TypedRejections) {
  GameSpec s = Accepted();
  s.T = 0.0;
  EXPECT_EQ(CodeOf(s), ErrorCode::kNonpositiveHorizon);

  s = Accepted();
  s.B1 = MatrixXd::Ones(2, 1);
  EXPECT_EQ(CodeOf(s), ErrorCode::kDimensionMismatch);

  s = Accepted();
  s.A(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(CodeOf(s), ErrorCode::kNonFinite);

  s = testing::TwoState();
  s.Q2(0, 1) += 1e-6;
  EXPECT_EQ(CodeOf(s), ErrorCode::kNotSymmetric);

  s = Accepted();
  s.G1(0, 0) = -1e-9;
  EXPECT_EQ(CodeOf(s), ErrorCode::kNotPsd);
}

TEST(ValidateSpec, ToleratesRoundOffAsymmetryAndSymmetrizes) {
  GameSpec s = testing::TwoState();
  s.Q2(0, 1) += 5e-13;
  const GameSpec v = ValidateSpec(s);
  EXPECT_EQ(v.Q2(0, 1), v.Q2(1, 0));
}

TEST(ValidateSpec, PsdToleranceBoundary) {
  GameSpec s = Accepted();
  s.Q1(0, 0) = -5e-11;
  EXPECT_NO_THROW(ValidateSpec(s));
  s.R1(0, 0) = 5e-9;
  EXPECT_EQ(CodeOf(s), ErrorCode::kNotPd);
}

TEST(ValidateSpec, Idempotent) {
  for (const GameSpec& s : {testing::Reference(), testing::Stochastic(),
                            testing::TwoState(), testing::FollowerFree()}) {
    const GameSpec once = ValidateSpec(s);
    const GameSpec twice = ValidateSpec(once);
    EXPECT_EQ(once.A, twice.A);
    EXPECT_EQ(once.Q1, twice.Q1);
    EXPECT_EQ(once.Q2, twice.Q2);
    EXPECT_EQ(once.G2, twice.G2);
    EXPECT_EQ(once.R2, twice.R2);
    EXPECT_EQ(once.x0, twice.x0);
    EXPECT_EQ(once.T, twice.T);
  }
}

TEST(TimeGrid, EndpointIsExact) {
  const TimeGrid g(0.7, 3);
  EXPECT_EQ(g.num_nodes(), 4);
  EXPECT_EQ(g.t(0), 0.0);
  EXPECT_EQ(g.t(3), 0.7);
  EXPECT_DOUBLE_EQ(g.step(), 0.7 / 3);
}

TEST(TimeGrid, RejectsEmptyGrid) {
  EXPECT_THROW(TimeGrid(1.0, 0), SolverError);
}

TEST(Errors, NamesAreStable) {
  EXPECT_EQ(ErrorName(ErrorCode::kNotPd), "NotPD");
  EXPECT_EQ(ErrorName(ErrorCode::kNotPsd), "NotPSD");
  EXPECT_EQ(ErrorName(ErrorCode::kBlowUp), "BlowUp");
  EXPECT_EQ(ErrorName(ErrorCode::kNoConvergence), "NoConvergence");
  EXPECT_EQ(ErrorName(ErrorCode::kSingularKkt), "SingularKKT");
}

}  // namespace
}  // namespace stackelq
