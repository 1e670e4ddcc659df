#include <gtest/gtest.h>

#include <cmath>

#include "instances.h"
#include "stackelq/augment.h"
#include "stackelq/errors.h"
#include "stackelq/noise.h"
#include "stackelq/openloop.h"
#include "stackelq/riccati.h"

namespace stackelq {
namespace {

RiccatiSolution Solve(const GameSpec& s, int n) {
  return SolveRiccati(HatRiccatiSystem(AssembleHat(s)), TimeGrid(s.T, n));
}

TEST(Synthesize, ZeroRiccatiGivesZeroGains) {
  const GameSpec s = GameSpec::Scalar(0.3, 1, 1, 0, 0, 0, 1, 1, 0, 0, 1, 1);
  const FeedbackLaw law = Synthesize(Solve(s, 20), s);
  for (std::size_t k = 0; k < law.u_gain.size(); ++k) {
    EXPECT_TRUE(law.u_gain[k].isZero(0));
    EXPECT_TRUE(law.v_gain[k].isZero(0));
  }
}

TEST(Synthesize, NoLeaderInputGivesZeroLeaderGain) {
  const GameSpec s = GameSpec::Scalar(0.3, 0, 1, 0, 1, 1, 1, 1, 1, 1, 1, 1);
  const FeedbackLaw law = Synthesize(Solve(s, 20), s);
  for (const MatrixXd& g : law.u_gain) EXPECT_TRUE(g.isZero(0));
}

TEST(Synthesize, FollowerFreeGain) {
  const GameSpec s = testing::FollowerFree();
  const FeedbackLaw law = Synthesize(Solve(s, 2000), s);
  EXPECT_NEAR(law.u_gain[0](0, 0), -0.5, 1e-6);
}

TEST(Synthesize, RejectsTildeSolution) {
  const GameSpec s = testing::Reference();
  const SymmetrizedSystem sym =
      Symmetrize(AssembleHat(s), CheckSymmetrizable(s));
  const RiccatiSolution tilde = SolveRiccati(
      TildeRiccatiSystem(sym), TimeGrid(1.0, 10), SystemTag::kTilde);
  EXPECT_THROW(Synthesize(tilde, s), SolverError);
}

TEST(Simulate, ZeroStateStaysZero) {
  GameSpec s = testing::Stochastic();
  s.x0 << 0.0;
  const TimeGrid grid(1.0, 100);
  const TrajectoryEnsemble ens =
      Simulate(Synthesize(Solve(s, 100), s), s, grid, 5, 1);
  for (int p = 0; p < 5; ++p) {
    for (int k = 0; k <= 100; ++k) {
      EXPECT_TRUE(ens.XHat(p, k).isZero(0));
      EXPECT_TRUE(ens.U(p, k).isZero(0));
      EXPECT_TRUE(ens.V(p, k).isZero(0));
    }
  }
  const CostEstimate c = CostsMc(ens, s);
  EXPECT_EQ(c.J1, 0.0);
  EXPECT_EQ(c.J2, 0.0);
  EXPECT_EQ(c.se1, 0.0);
  const MomentCosts m = CostsMoment(Solve(s, 100), s, grid);
  EXPECT_EQ(m.J1, 0.0);
  EXPECT_EQ(m.J2, 0.0);
}

TEST(Simulate, DeterministicPathsAreIdentical) {
  const GameSpec s = testing::Reference();
  const TimeGrid grid(1.0, 200);
  const TrajectoryEnsemble ens =
      Simulate(Synthesize(Solve(s, 200), s), s, grid, 7, 3);
  for (int p = 1; p < 7; ++p) {
    for (int k = 0; k <= 200; ++k) {
      EXPECT_EQ(ens.XHat(p, k), ens.XHat(0, k));
    }
  }
  const CostEstimate c = CostsMc(ens, s);
  EXPECT_EQ(c.se1, 0.0);
  EXPECT_EQ(c.se2, 0.0);
  const TrajectoryEnsemble one =
      Simulate(Synthesize(Solve(s, 200), s), s, grid, 1, 3);
  EXPECT_EQ(c.J1, CostsMc(one, s).J1);
}

TEST(Simulate, ZeroDynamicsHoldState) {
  const GameSpec s = GameSpec::Scalar(0, 0, 0, 0, 0, 0, 1, 1, 0, 0, 1, 1);
  const TimeGrid grid(1.0, 50);
  const TrajectoryEnsemble ens =
      Simulate(Synthesize(Solve(s, 50), s), s, grid, 2, 9);
  for (int k = 0; k <= 50; ++k) {
    EXPECT_EQ(ens.X(1, k)(0), 1.0);
    EXPECT_EQ(ens.Y(1, k)(0), 0.0);
  }
}

TEST(Simulate, BoundaryConditions) {
  const GameSpec s = testing::TwoState();
  const TimeGrid grid(1.0, 100);
  const TrajectoryEnsemble ens =
      Simulate(Synthesize(Solve(s, 100), s), s, grid, 3, 4);
  const HatSystem hat = AssembleHat(s);
  for (int p = 0; p < 3; ++p) {
    EXPECT_EQ(ens.X(p, 0), s.x0);
    EXPECT_TRUE(ens.Y(p, 0).isZero(0));
    EXPECT_EQ(ens.PHat(p, 100), hat.Ghat * ens.XHat(p, 100));
  }
}

TEST(Simulate, SeedDeterministicAcrossWorkers) {
  const GameSpec s = testing::Stochastic();
  const TimeGrid grid(1.0, 100);
  const FeedbackLaw law = Synthesize(Solve(s, 100), s);
  const TrajectoryEnsemble a = Simulate(law, s, grid, 37, 11, 1);
  const TrajectoryEnsemble b = Simulate(law, s, grid, 37, 11, 4);
  for (int p = 0; p < 37; ++p) {
    for (int k = 0; k <= 100; ++k) {
      ASSERT_EQ(a.XHat(p, k), b.XHat(p, k));
      ASSERT_EQ(a.DeltaW(p, k), b.DeltaW(p, k));
    }
  }
  const CostEstimate ca = CostsMc(a, s, 1), cb = CostsMc(b, s, 3);
  EXPECT_EQ(ca.J1, cb.J1);
  EXPECT_EQ(ca.se2, cb.se2);
  const TrajectoryEnsemble c = Simulate(law, s, grid, 37, 12, 1);
  EXPECT_NE(a.XHat(5, 50), c.XHat(5, 50));
}

TEST(Noise, CounterBasedNormals) {
  EXPECT_EQ(StandardNormal(1, NoiseStream::kBrownian, 3, 4),
            StandardNormal(1, NoiseStream::kBrownian, 3, 4));
  EXPECT_NE(StandardNormal(1, NoiseStream::kBrownian, 3, 4),
            StandardNormal(1, NoiseStream::kPerturbation, 3, 4));
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = StandardNormal(5, NoiseStream::kBrownian, i / 100, i % 100);
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.02);
}

TEST(CostsMoment, ZeroDynamicsConstantIntegrand) {
  const GameSpec s = GameSpec::Scalar(0, 0, 0, 0, 1, 0, 1, 1, 0, 0, 1, 1);
  const TimeGrid grid(1.0, 10);
  EXPECT_NEAR(CostsMoment(Solve(s, 10), s, grid).J1, 0.5, 1e-15);
}

TEST(CostsMoment, ReferenceValues) {
  const GameSpec s = testing::Reference();
  const TimeGrid grid(1.0, 1000);
  const MomentCosts m = CostsMoment(Solve(s, 1000), s, grid);
  EXPECT_NEAR(m.J1, testing::kReferenceJ1, 1e-9);
  EXPECT_NEAR(m.J2, testing::kReferenceJ2, 1e-9);
}

TEST(CostsMc, FollowerFreeValueIdentity) {
  const GameSpec s = testing::FollowerFree();
  const TimeGrid grid(1.0, 2000);
  const RiccatiSolution sol = Solve(s, 2000);
  const CostEstimate c = CostsMc(Simulate(Synthesize(sol, s), s, grid, 1, 0), s);
  const double value = 0.5 * sol.at(0)(0, 0);
  EXPECT_LE(std::abs(c.J1 - value) / value, 1e-3);
}

TEST(CostsMc, StochasticAgreesWithMoment) {
  const GameSpec s = testing::Stochastic();
  const TimeGrid grid(1.0, 200);
  const RiccatiSolution sol = Solve(s, 200);
  const CostEstimate c =
      CostsMc(Simulate(Synthesize(sol, s), s, grid, 4000, 99, 4), s, 4);
  const MomentCosts m = CostsMoment(sol, s, grid);
  EXPECT_LE(std::abs(c.J1 - m.J1), 3.0 * c.se1);
  EXPECT_LE(std::abs(c.J2 - m.J2), 3.0 * c.se2);
  EXPECT_GT(c.se1, 0.0);
}

TEST(MeanPath, MatchesDeterministicSimulationToFirstOrder) {
  const GameSpec s = testing::Reference();
  const TimeGrid grid(1.0, 1000);
  const RiccatiSolution sol = Solve(s, 1000);
  const std::vector<VectorXd> mean = MeanPath(sol, s);
  const TrajectoryEnsemble ens = Simulate(Synthesize(sol, s), s, grid, 1, 0);
  double gap = 0.0;
  for (int k = 0; k <= 1000; ++k) {
    gap = std::max(gap, (mean[k] - ens.XHat(0, k)).cwiseAbs().maxCoeff());
  }
  EXPECT_LE(gap, 2e-3);
  EXPECT_GT(gap, 0.0);
}

TEST(GradientResidual, SynthesisIdentity) {
  const GameSpec s = testing::Stochastic();
  const TimeGrid grid(1.0, 200);
  const TrajectoryEnsemble ens =
      Simulate(Synthesize(Solve(s, 200), s), s, grid, 20, 2);
  EXPECT_LE(GradientResidual(ens, s, AdjointSource::kRiccati), 1e-12);
  EXPECT_THROW(GradientResidual(ens, s, AdjointSource::kIndependent),
               SolverError);
}

TEST(GradientResidual, ForcedConstantControl) {
  const GameSpec s = GameSpec::Scalar(0, 0, 1, 0, 1, 1, 1, 1, 1, 1, 1, 1);
  const TimeGrid grid(1.0, 100);
  FeedbackLaw law = Synthesize(Solve(s, 100), s);
  law.u_offset.assign(101, VectorXd::Ones(1));
  const TrajectoryEnsemble ens = Simulate(law, s, grid, 1, 0);
  EXPECT_NEAR(GradientResidual(ens, s, AdjointSource::kRiccati), 1.0, 1e-12);
  EXPECT_NEAR(GradientResidual(ens, s, AdjointSource::kIndependent), 1.0,
              1e-12);
}

TEST(GradientResidual, IndependentAdjointHalvesWithStep) {
  const GameSpec s = testing::Reference();
  auto residual = [&](int n) {
    const TimeGrid grid(1.0, n);
    const TrajectoryEnsemble ens =
        Simulate(Synthesize(Solve(s, n), s), s, grid, 1, 0);
    return GradientResidual(ens, s, AdjointSource::kIndependent);
  };
  const double r1 = residual(1000), r2 = residual(2000);
  EXPECT_LE(r2, 5e-3);
  EXPECT_NEAR(r1 / r2, 2.0, 0.2);
}

TEST(BackwardDefect, FirstOrderOnStochasticInstance) {
  const GameSpec s = testing::Stochastic();
  auto defect = [&](int n) {
    const TimeGrid grid(1.0, n);
    return BackwardDefect(
        Simulate(Synthesize(Solve(s, n), s), s, grid, 400, 5, 4), s);
  };
  const double ratio = defect(250) / defect(500);
  EXPECT_GE(ratio, 1.7);
  EXPECT_LE(ratio, 2.3);
}

TEST(FollowerSweeps, ZeroFollowerWeightsGiveZeroResponse) {
  const GameSpec s = GameSpec::Scalar(0.2, 1, 1, 0, 1, 0, 1, 1, 1, 0, 1, 1);
  const TimeGrid grid(1.0, 100);
  const std::vector<VectorXd> u(101, VectorXd::Constant(1, 0.3));
  const FollowerResponse r = SolveFollowerSweeps(u, s, grid);
  for (const VectorXd& v : r.v) EXPECT_TRUE(v.isZero(0));
  for (const VectorXd& p : r.p2) EXPECT_TRUE(p.isZero(0));
}

TEST(FollowerSweeps, ResponseCheck) {
  const GameSpec ff = testing::FollowerFree();
  EXPECT_EQ(FollowerResponseCheck(Synthesize(Solve(ff, 100), ff), ff,
                                  TimeGrid(1.0, 100)),
            0.0);
  const GameSpec s = testing::Reference();
  auto gap = [&](int n) {
    return FollowerResponseCheck(Synthesize(Solve(s, n), s), s,
                                 TimeGrid(1.0, n));
  };
  const double g1 = gap(1000), g2 = gap(2000);
  EXPECT_LE(g2, 5e-3);
  EXPECT_NEAR(g1 / g2, 2.0, 0.2);
}

TEST(PerturbationProbe, ZeroStepGivesZero) {
  const GameSpec s = testing::Reference();
  const TimeGrid grid(1.0, 200);
  ProbeOptions opts;
  opts.directions = 3;
  opts.eps = {0.0};
  const ProbeReport r =
      PerturbationProbe(Synthesize(Solve(s, 200), s), s, grid, 1, opts);
  for (const ProbeSample& p : r.samples) EXPECT_EQ(p.delta_j1, 0.0);
}

TEST(PerturbationProbe, ConvexAndQuadratic) {
  const GameSpec s = testing::Reference();
  const TimeGrid grid(1.0, 2000);
  ProbeOptions opts;
  // The discrete first-order term is O(h); at these steps the quadratic term
  // dominates it by two orders of magnitude.
  opts.eps = {1e-1, 2e-1};
  const ProbeReport r =
      PerturbationProbe(Synthesize(Solve(s, 2000), s), s, grid, 17, opts);
  EXPECT_GE(r.min_delta, -1e-8);
  for (int d = 0; d < opts.directions; ++d) {
    const double a = r.samples[2 * d].delta_j1;
    const double b = r.samples[2 * d + 1].delta_j1;
    EXPECT_NEAR(b / a, 4.0, 0.2) << "direction " << d;
  }
}

TEST(PerturbationProbe, StochasticUsesCommonNoise) {
  const GameSpec s = testing::Stochastic();
  const TimeGrid grid(1.0, 200);
  ProbeOptions opts;
  opts.directions = 4;
  opts.eps = {1e-1};
  opts.n_paths = 400;
  opts.workers = 4;
  const FeedbackLaw law = Synthesize(Solve(s, 200), s);
  const ProbeReport a = PerturbationProbe(law, s, grid, 3, opts);
  opts.workers = 1;
  const ProbeReport b = PerturbationProbe(law, s, grid, 3, opts);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_EQ(a.samples[i].delta_j1, b.samples[i].delta_j1);
    // At eps = 0.1 the quadratic term dominates the O(h) first-order bias.
    EXPECT_GT(a.samples[i].delta_j1, 0.0);
  }
}

}  // namespace
}  // namespace stackelq
