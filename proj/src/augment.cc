#include "stackelq/augment.h"

#include <cmath>
#include <string>

#include "stackelq/errors.h"

namespace stackelq {
namespace {

constexpr double kSymmetrizedTolerance = 1e-10;

MatrixXd BlockDiag(const MatrixXd& m) {
  const Eigen::Index n = m.rows();
  MatrixXd out = MatrixXd::Zero(2 * n, 2 * n);
  out.topLeftCorner(n, n) = m;
  out.bottomRightCorner(n, n) = m;
  return out;
}

// [[top_left, -other], [other, 0]]
MatrixXd LeaderBlock(const MatrixXd& top_left, const MatrixXd& other) {
  const Eigen::Index n = top_left.rows();
  MatrixXd out = MatrixXd::Zero(2 * n, 2 * n);
  out.topLeftCorner(n, n) = top_left;
  out.topRightCorner(n, n) = -other;
  out.bottomLeftCorner(n, n) = other;
  return out;
}

bool RelativelyEqual(double a, double b) {
  return std::abs(a - b) <= kRatioTolerance * std::max(std::abs(a), std::abs(b));
}

void RequireSymmetricPsd(const MatrixXd& m, const char* name) {
  const double asym = AsymmetryNorm(m);
  if (asym > kSymmetrizedTolerance) {
    throw SolverError(ErrorCode::kSymmetrizationFailed, name, asym,
                      std::string(name) + " is not symmetric");
  }
  const double lo = MinEigenvalue(m);
  if (lo < kPsdTolerance) {
    throw SolverError(ErrorCode::kSymmetrizationFailed, name, lo,
                      std::string(name) + " is not positive semidefinite");
  }
}

}  // namespace

HatSystem AssembleHat(const GameSpec& spec) {
  const Eigen::Index n = spec.n();
  const MatrixXd s1 = spec.B1 * spec.R1.llt().solve(spec.B1.transpose());
  const MatrixXd s2 = spec.B2 * spec.R2.llt().solve(spec.B2.transpose());

  HatSystem hat;
  hat.Ahat = BlockDiag(spec.A);
  hat.Chat = BlockDiag(spec.C);
  hat.Bhat = MatrixXd::Zero(2 * n, 2 * n);
  hat.Bhat.topLeftCorner(n, n) = s1;
  hat.Bhat.topRightCorner(n, n) = s2;
  hat.Bhat.bottomLeftCorner(n, n) = -s2;
  hat.Qhat = LeaderBlock(spec.Q1, spec.Q2);
  hat.Ghat = LeaderBlock(spec.G1, spec.G2);
  return hat;
}

SymmetrizingRatios CheckSymmetrizable(const GameSpec& spec) {
  if (spec.n() != 1) {
    throw SolverError(ErrorCode::kNotScalar, "n", spec.n(),
                      "symmetrization is only defined for a scalar state");
  }
  const double q1 = spec.Q1(0, 0), q2 = spec.Q2(0, 0);
  const double g1 = spec.G1(0, 0), g2 = spec.G2(0, 0);
  const double s1 = (spec.B1 * spec.R1.llt().solve(spec.B1.transpose()))(0, 0);
  const double s2 = (spec.B2 * spec.R2.llt().solve(spec.B2.transpose()))(0, 0);
  if (q1 == 0.0) {
    throw SolverError(ErrorCode::kDegenerateRatio, "Q1", q1, "Q1 is zero");
  }
  if (g1 == 0.0) {
    throw SolverError(ErrorCode::kDegenerateRatio, "G1", g1, "G1 is zero");
  }
  if (s1 == 0.0) {
    throw SolverError(ErrorCode::kDegenerateRatio, "B1R1B1", s1,
                      "leader control matrix is zero");
  }
  const double alpha_q = q2 / q1;
  const double alpha_g = g2 / g1;
  const double beta = s2 / s1;
  if (!RelativelyEqual(alpha_q, alpha_g)) {
    throw SolverError(ErrorCode::kRatioMismatch, "Q2/Q1", alpha_q - alpha_g,
                      "Q2/Q1 = " + std::to_string(alpha_q) +
                          " but G2/G1 = " + std::to_string(alpha_g));
  }
  if (!(alpha_q > 0.0) || !(alpha_g > 0.0) || !(beta > 0.0) ||
      !std::isfinite(alpha_q) || !std::isfinite(beta)) {
    throw SolverError(ErrorCode::kDegenerateRatio, "alpha/beta",
                      alpha_q > 0.0 ? beta : alpha_q,
                      "ratios must be finite and positive");
  }
  return {alpha_q, beta};
}

SymmetrizedSystem Symmetrize(const HatSystem& hat,
                             const SymmetrizingRatios& ratios) {
  if (hat.Bhat.rows() != 2) {
    throw SolverError(ErrorCode::kNotScalar, "n", hat.Bhat.rows() / 2.0,
                      "symmetrization is only defined for a scalar state");
  }
  const double a = ratios.alpha, b = ratios.beta;
  SymmetrizedSystem sym;
  sym.ratios = ratios;
  sym.Phi.resize(2, 2);
  sym.Phi << 1.0, -2.0 * b, 2.0 * a, 1.0;
  // det Phi = 1 + 4ab > 0 for positive ratios.
  sym.PhiInv.resize(2, 2);
  sym.PhiInv << 1.0, 2.0 * b, -2.0 * a, 1.0;
  sym.PhiInv /= 1.0 + 4.0 * a * b;

  sym.Atilde = hat.Ahat;
  sym.Ctilde = hat.Chat;
  sym.Btilde = hat.Bhat * sym.Phi;
  sym.Qtilde = sym.PhiInv * hat.Qhat;
  sym.Gtilde = sym.PhiInv * hat.Ghat;
  RequireSymmetricPsd(sym.Btilde, "Btilde");
  RequireSymmetricPsd(sym.Qtilde, "Qtilde");
  RequireSymmetricPsd(sym.Gtilde, "Gtilde");
  return sym;
}

}  // namespace stackelq
