#include "stackelq/core.h"

#include <cmath>
#include <string>

#include "stackelq/errors.h"

namespace stackelq {
namespace {

MatrixXd Scalar1(double v) { return MatrixXd::Constant(1, 1, v); }

void RequireShape(const MatrixXd& m, const char* name, Eigen::Index rows,
                  Eigen::Index cols) {
  if (m.rows() != rows || m.cols() != cols) {
    throw SolverError(
        ErrorCode::kDimensionMismatch, name, 0.0,
        std::string(name) + " is " + std::to_string(m.rows()) + "x" +
            std::to_string(m.cols()) + ", expected " + std::to_string(rows) +
            "x" + std::to_string(cols));
  }
  if (!m.allFinite()) {
    throw SolverError(ErrorCode::kNonFinite, name, 0.0,
                      std::string(name) + " has non-finite entries");
  }
}

MatrixXd Symmetrized(const MatrixXd& m, const char* name) {
  const double asym = AsymmetryNorm(m);
  if (asym > kSymmetryTolerance) {
    throw SolverError(ErrorCode::kNotSymmetric, name, asym,
                      std::string(name) + " is not symmetric");
  }
  return 0.5 * (m + m.transpose());
}

void RequirePsd(const MatrixXd& m, const char* name) {
  const double lo = MinEigenvalue(m);
  if (lo < kPsdTolerance) {
    throw SolverError(ErrorCode::kNotPsd, name, lo,
                      std::string(name) + " has eigenvalue " +
                          std::to_string(lo));
  }
}

void RequirePd(const MatrixXd& m, const char* name) {
  const double lo = MinEigenvalue(m);
  if (!(lo >= kPdFloor)) {
    throw SolverError(ErrorCode::kNotPd, name, lo,
                      std::string(name) + " has smallest eigenvalue " +
                          std::to_string(lo));
  }
}

}  // namespace

GameSpec GameSpec::Scalar(double a, double b1, double b2, double c, double q1,
                          double q2, double r1, double r2, double g1,
                          double g2, double horizon, double x0) {
  GameSpec s;
  s.A = Scalar1(a);
  s.B1 = Scalar1(b1);
  s.B2 = Scalar1(b2);
  s.C = Scalar1(c);
  s.Q1 = Scalar1(q1);
  s.Q2 = Scalar1(q2);
  s.R1 = Scalar1(r1);
  s.R2 = Scalar1(r2);
  s.G1 = Scalar1(g1);
  s.G2 = Scalar1(g2);
  s.T = horizon;
  s.x0 = VectorXd::Constant(1, x0);
  return s;
}

GameSpec ValidateSpec(const GameSpec& raw) {
  const Eigen::Index n = raw.A.rows();
  const Eigen::Index m1 = raw.B1.cols();
  const Eigen::Index m2 = raw.B2.cols();
  if (n < 1 || m1 < 1 || m2 < 1) {
    throw SolverError(ErrorCode::kDimensionMismatch, "A", 0.0,
                      "state and control dimensions must be positive");
  }
  RequireShape(raw.A, "A", n, n);
  RequireShape(raw.B1, "B1", n, m1);
  RequireShape(raw.B2, "B2", n, m2);
  RequireShape(raw.C, "C", n, n);
  RequireShape(raw.Q1, "Q1", n, n);
  RequireShape(raw.Q2, "Q2", n, n);
  RequireShape(raw.R1, "R1", m1, m1);
  RequireShape(raw.R2, "R2", m2, m2);
  RequireShape(raw.G1, "G1", n, n);
  RequireShape(raw.G2, "G2", n, n);
  if (raw.x0.size() != n) {
    throw SolverError(ErrorCode::kDimensionMismatch, "x0", 0.0,
                      "x0 has length " + std::to_string(raw.x0.size()));
  }
  if (!raw.x0.allFinite()) {
    throw SolverError(ErrorCode::kNonFinite, "x0", 0.0, "x0 not finite");
  }
  if (!(raw.T > 0.0) || !std::isfinite(raw.T)) {
    throw SolverError(ErrorCode::kNonpositiveHorizon, "T", raw.T,
                      "horizon must be positive");
  }

  GameSpec s = raw;
  s.Q1 = Symmetrized(raw.Q1, "Q1");
  s.Q2 = Symmetrized(raw.Q2, "Q2");
  s.G1 = Symmetrized(raw.G1, "G1");
  s.G2 = Symmetrized(raw.G2, "G2");
  s.R1 = Symmetrized(raw.R1, "R1");
  s.R2 = Symmetrized(raw.R2, "R2");
  RequirePsd(s.Q1, "Q1");
  RequirePsd(s.Q2, "Q2");
  RequirePsd(s.G1, "G1");
  RequirePsd(s.G2, "G2");
  RequirePd(s.R1, "R1");
  RequirePd(s.R2, "R2");
  return s;
}

TimeGrid::TimeGrid(double horizon, int steps)
    : horizon_(horizon), steps_(steps), step_(horizon / steps) {
  if (steps < 1) {
    throw SolverError(ErrorCode::kInvalidGrid, "N", steps,
                      "grid needs at least one step");
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw SolverError(ErrorCode::kNonpositiveHorizon, "T", horizon,
                      "horizon must be positive");
  }
}

double TimeGrid::t(int k) const {
  if (k >= steps_) return horizon_;
  return horizon_ * static_cast<double>(k) / static_cast<double>(steps_);
}

double AsymmetryNorm(const MatrixXd& m) {
  if (m.rows() != m.cols()) return INFINITY;
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

double MinEigenvalue(const MatrixXd& m) {
  const MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

MatrixXd EmbedTopLeft(const MatrixXd& block) {
  const Eigen::Index n = block.rows();
  MatrixXd out = MatrixXd::Zero(2 * n, 2 * n);
  out.topLeftCorner(n, n) = block;
  return out;
}

}  // namespace stackelq
