#include "stackelq/riccati.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "stackelq/errors.h"
#include "stackelq/interpolation.h"

namespace stackelq {
namespace {

bool Healthy(const MatrixXd& m) {
  return m.allFinite() && m.cwiseAbs().maxCoeff() <= kBlowUpThreshold;
}

}  // namespace

RiccatiSystem HatRiccatiSystem(const HatSystem& hat) {
  return {hat.Ahat, hat.Bhat, hat.Chat, hat.Qhat, hat.Ghat};
}

RiccatiSystem TildeRiccatiSystem(const SymmetrizedSystem& sym) {
  return {sym.Atilde, sym.Btilde, sym.Ctilde, sym.Qtilde, sym.Gtilde};
}

MatrixXd RiccatiRhs(const RiccatiSystem& sys, const MatrixXd& K) {
  MatrixXd out = K * sys.A;
  out.noalias() += sys.A.transpose() * K;
  out.noalias() -= K * sys.B * K;
  out.noalias() += sys.C.transpose() * K * sys.C;
  out += sys.Q;
  return out;
}

RiccatiSolution::RiccatiSolution(TimeGrid grid, RiccatiSystem system,
                                 SystemTag tag, std::vector<MatrixXd> nodes)
    : grid_(grid),
      system_(std::move(system)),
      tag_(tag),
      nodes_(std::move(nodes)) {
  derivatives_.reserve(nodes_.size());
  for (const MatrixXd& k : nodes_) {
    derivatives_.push_back(-RiccatiRhs(system_, k));
  }
}

MatrixXd RiccatiSolution::Interpolate(double t) const {
  const double h = grid_.step();
  const int last = grid_.steps();
  if (t <= 0.0) return nodes_.front();
  if (t >= grid_.horizon()) return nodes_.back();
  const int k = std::min(static_cast<int>(t / h), last - 1);
  const double theta = (t - grid_.t(k)) / h;
  return (1.0 - theta) * nodes_[k] + theta * nodes_[k + 1];
}

MatrixXd RiccatiSolution::Hermite(int k, double theta) const {
  if (theta == 0.0) return nodes_[k];
  if (theta == 1.0) return nodes_[k + 1];
  return HermiteValue<MatrixXd>(nodes_[k], nodes_[k + 1], derivatives_[k],
                                derivatives_[k + 1], grid_.step(), theta);
}

RiccatiSolution SolveRiccati(const RiccatiSystem& system, const TimeGrid& grid,
                             SystemTag tag) {
  const int dim = static_cast<int>(system.A.rows());
  for (const MatrixXd* m : {&system.A, &system.B, &system.C, &system.Q,
                            &system.G}) {
    if (m->rows() != dim || m->cols() != dim) {
      throw SolverError(ErrorCode::kDimensionMismatch,
                        "Riccati system matrices must share one square shape");
    }
  }
  const int steps = grid.steps();
  const double h = grid.step();
  std::vector<MatrixXd> nodes(steps + 1);
  nodes[steps] = system.G;
  if (!Healthy(nodes[steps])) {
    throw SolverError(ErrorCode::kBlowUp, "t", grid.t(steps),
                      "terminal weight is not finite");
  }

  // Backward in time: dK/d(-t) = F(K).
  for (int k = steps - 1; k >= 0; --k) {
    const MatrixXd& kn = nodes[k + 1];
    const MatrixXd f1 = RiccatiRhs(system, kn);
    const MatrixXd f2 = RiccatiRhs(system, kn + 0.5 * h * f1);
    const MatrixXd f3 = RiccatiRhs(system, kn + 0.5 * h * f2);
    const MatrixXd f4 = RiccatiRhs(system, kn + h * f3);
    nodes[k] = kn + (h / 6.0) * (f1 + 2.0 * f2 + 2.0 * f3 + f4);
    if (!Healthy(nodes[k])) {
      throw SolverError(ErrorCode::kBlowUp, "t", grid.t(k),
                        "Riccati solution blew up at t = " +
                            std::to_string(grid.t(k)));
    }
  }
  return RiccatiSolution(grid, system, tag, std::move(nodes));
}

RiccatiSolution RecoverFromTilde(const SymmetrizedSystem& sym,
                                 const RiccatiSolution& tilde) {
  std::vector<MatrixXd> nodes;
  nodes.reserve(tilde.nodes().size());
  for (const MatrixXd& kt : tilde.nodes()) nodes.push_back(sym.Phi * kt);

  // The hat coefficients are the preimages of the tilde ones.
  RiccatiSystem hat{sym.Atilde, sym.Btilde * sym.PhiInv, sym.Ctilde,
                    sym.Phi * sym.Qtilde, sym.Phi * sym.Gtilde};
  return RiccatiSolution(tilde.grid(), std::move(hat), SystemTag::kHat,
                         std::move(nodes));
}

double RiccatiResidual(const RiccatiSolution& sol,
                       const RiccatiSystem& system) {
  const TimeGrid& grid = sol.grid();
  if (grid.steps() < 4) {
    throw SolverError(ErrorCode::kGridTooCoarse, "N", grid.steps(),
                      "residual needs at least 4 steps");
  }
  const double two_h = 2.0 * grid.step();
  double worst = 0.0;
  for (int k = 1; k < grid.steps(); ++k) {
    const MatrixXd defect = (sol.at(k + 1) - sol.at(k - 1)) / two_h +
                            RiccatiRhs(system, sol.at(k));
    worst = std::max(worst, defect.cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace stackelq
