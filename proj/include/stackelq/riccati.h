#pragma once

#include <vector>

#include "stackelq/augment.h"
#include "stackelq/core.h"

namespace stackelq {

inline constexpr double kBlowUpThreshold = 1e12;

// Coefficients of  dK/dt = -(K A + A' K - K B K + C' K C + Q),  K(T) = G.
// None of them is assumed symmetric.
struct RiccatiSystem {
  MatrixXd A, B, C, Q, G;
};

RiccatiSystem HatRiccatiSystem(const HatSystem& hat);
RiccatiSystem TildeRiccatiSystem(const SymmetrizedSystem& sym);

enum class SystemTag { kHat, kTilde };

// K(T) - K(t) direction: returns K A + A' K - K B K + C' K C + Q.
MatrixXd RiccatiRhs(const RiccatiSystem& sys, const MatrixXd& K);

// Node values of K on a grid. K[N] is a bit-for-bit copy of the terminal
// weight. Between nodes the path is linear in t (Interpolate) unless a caller
// asks for the cubic Hermite reconstruction, which uses the exact node
// derivatives of the flow and is what the fourth-order transports use.
class RiccatiSolution {
 public:
  RiccatiSolution(TimeGrid grid, RiccatiSystem system, SystemTag tag,
                  std::vector<MatrixXd> nodes);

  const TimeGrid& grid() const { return grid_; }
  const RiccatiSystem& system() const { return system_; }
  SystemTag tag() const { return tag_; }
  const std::vector<MatrixXd>& nodes() const { return nodes_; }
  const MatrixXd& at(int k) const { return nodes_[k]; }
  int dim() const { return static_cast<int>(nodes_.front().rows()); }

  // dK/dt at node k.
  const MatrixXd& Derivative(int k) const { return derivatives_[k]; }

  MatrixXd Interpolate(double t) const;
  // Hermite value at t_k + theta h, theta in [0, 1].
  MatrixXd Hermite(int k, double theta) const;

 private:
  TimeGrid grid_;
  RiccatiSystem system_;
  SystemTag tag_;
  std::vector<MatrixXd> nodes_;
  std::vector<MatrixXd> derivatives_;
};

// Classical fixed-step RK4 backward from K(T) = G. Throws BlowUp with the
// first (latest-in-time) node whose entries are non-finite or exceed
// kBlowUpThreshold.
RiccatiSolution SolveRiccati(const RiccatiSystem& system, const TimeGrid& grid,
                             SystemTag tag = SystemTag::kHat);

// K = Phi Ktilde, node by node; tagged as a hat-system solution.
RiccatiSolution RecoverFromTilde(const SymmetrizedSystem& sym,
                                 const RiccatiSolution& tilde);

// Max over interior nodes of the sup-norm of the centered-difference defect
//   (K[k+1] - K[k-1]) / 2h + RiccatiRhs(K[k]).
// Throws GridTooCoarse when N < 4.
double RiccatiResidual(const RiccatiSolution& sol, const RiccatiSystem& system);

}  // namespace stackelq
