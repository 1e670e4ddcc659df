#include "stackelq/oracle.h"

#include <cmath>
#include <limits>
#include <string>

#include "stackelq/augment.h"
#include "stackelq/errors.h"
#include "stackelq/openloop.h"
#include "stackelq/parallel.h"
#include "stackelq/riccati.h"

namespace stackelq {
namespace {

double Dot(const ControlPath& a, const ControlPath& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k].dot(b[k]);
  return s;
}

ControlPath Zeros(int steps, int m) {
  return ControlPath(steps, VectorXd::Zero(m));
}

// Affine offsets of the follower's response: w_k = P_{k+1} d_k + s_{k+1}.
std::vector<VectorXd> Offsets(const ControlPath& u, const DiscreteGame& game) {
  const int steps = game.steps();
  const double h = game.grid().step();
  const int n = game.spec().n();
  std::vector<VectorXd> w(steps);
  VectorXd s = VectorXd::Zero(n);
  for (int k = steps - 1; k >= 0; --k) {
    w[k] = game.P(k + 1) * (h * (game.spec().B1 * u[k])) + s;
    s = game.Gamma(k).transpose() * w[k];
  }
  return w;
}

std::vector<VectorXd> Forward(const ControlPath& u,
                              const std::vector<VectorXd>& w,
                              const DiscreteGame& game, const VectorXd& x0,
                              ControlPath* v) {
  const int steps = game.steps();
  const double h = game.grid().step();
  std::vector<VectorXd> x(steps + 1);
  x[0] = x0;
  if (v) v->resize(steps);
  for (int k = 0; k < steps; ++k) {
    if (v) (*v)[k] = -game.Gain(k) * x[k] - game.MinvBt(k) * w[k];
    x[k + 1] = game.Gamma(k) * x[k] - game.E(k) * w[k] +
               h * (game.spec().B1 * u[k]);
  }
  return x;
}

double SupGap(const ControlPath& a, const std::vector<VectorXd>& b) {
  double gap = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    gap = std::max(gap, (a[k] - b[k]).cwiseAbs().maxCoeff());
  }
  return gap;
}

}  // namespace

DiscreteGame::DiscreteGame(const GameSpec& spec, const TimeGrid& grid)
    : spec_(ValidateSpec(spec)), grid_(grid) {
  if (!spec_.IsDeterministic()) {
    throw SolverError(ErrorCode::kRequiresDeterministic, "C",
                      spec_.C.cwiseAbs().maxCoeff(),
                      "the discrete oracle needs C = 0");
  }
  const int steps = grid_.steps();
  const int n = spec_.n();
  const double h = grid_.step();
  const MatrixXd ab = MatrixXd::Identity(n, n) + h * spec_.A;
  const MatrixXd bb = h * spec_.B2;
  p_.resize(steps + 1);
  f_.resize(steps);
  gamma_.resize(steps);
  e_.resize(steps);
  minv_bt_.resize(steps);
  p_[steps] = spec_.G2;
  for (int k = steps - 1; k >= 0; --k) {
    const MatrixXd& pn = p_[k + 1];
    MatrixXd m = h * spec_.R2 + bb.transpose() * pn * bb;
    m = 0.5 * (m + m.transpose());
    Eigen::LLT<MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) {
      throw SolverError(ErrorCode::kSingularKkt, "k", k,
                        "follower stage matrix is not positive definite");
    }
    minv_bt_[k] = llt.solve(bb.transpose());
    f_[k] = minv_bt_[k] * pn * ab;
    gamma_[k] = ab - bb * f_[k];
    e_[k] = bb * minv_bt_[k];
    MatrixXd p = h * spec_.Q2 + ab.transpose() * pn * gamma_[k];
    p_[k] = 0.5 * (p + p.transpose());
  }
}

double DiscreteCost(const std::vector<VectorXd>& x, const ControlPath& ctrl,
                    const MatrixXd& q, const MatrixXd& r, const MatrixXd& g,
                    double h) {
  double j = 0.0;
  for (std::size_t k = 0; k < ctrl.size(); ++k) {
    j += 0.5 * h * (x[k].dot(q * x[k]) + ctrl[k].dot(r * ctrl[k]));
  }
  return j + 0.5 * x.back().dot(g * x.back());
}

FollowerSolution FollowerBestResponse(const ControlPath& u,
                                      const DiscreteGame& game) {
  const GameSpec& spec = game.spec();
  if (static_cast<int>(u.size()) != game.steps()) {
    throw SolverError(ErrorCode::kDimensionMismatch, "u", u.size(),
                      "leader sequence needs one entry per step");
  }
  FollowerSolution sol;
  const std::vector<VectorXd> w = Offsets(u, game);
  sol.x = Forward(u, w, game, spec.x0, &sol.v);
  const double h = game.grid().step();
  sol.J1 = DiscreteCost(sol.x, u, spec.Q1, spec.R1, spec.G1, h);
  sol.J2 = DiscreteCost(sol.x, sol.v, spec.Q2, spec.R2, spec.G2, h);
  return sol;
}

double ReducedObjective(const ControlPath& u, const DiscreteGame& game) {
  return FollowerBestResponse(u, game).J1;
}

ControlPath ReducedGradient(const ControlPath& u, const DiscreteGame& game,
                            bool zero_initial_state) {
  const GameSpec& spec = game.spec();
  const int steps = game.steps();
  const int n = spec.n();
  const double h = game.grid().step();
  const std::vector<VectorXd> w = Offsets(u, game);
  const VectorXd x0 =
      zero_initial_state ? VectorXd::Zero(n) : VectorXd(spec.x0);
  const std::vector<VectorXd> x = Forward(u, w, game, x0, nullptr);

  // lambda_k = dJ/dx_k, k = 1..N.
  std::vector<VectorXd> lambda(steps + 1);
  lambda[steps] = spec.G1 * x[steps];
  for (int k = steps - 1; k >= 1; --k) {
    lambda[k] = h * (spec.Q1 * x[k]) + game.Gamma(k).transpose() * lambda[k + 1];
  }
  // mu_k = dJ/ds_{k+1}, accumulated forward.
  ControlPath grad(steps);
  VectorXd mu = VectorXd::Zero(n);
  for (int k = 0; k < steps; ++k) {
    mu = -game.E(k) * lambda[k + 1] + game.Gamma(k) * mu;
    grad[k] = h * (spec.R1 * u[k]) +
              h * spec.B1.transpose() * (lambda[k + 1] + game.P(k + 1) * mu);
  }
  return grad;
}

LeaderSolution LeaderSolve(const DiscreteGame& game,
                           const LeaderOptions& options) {
  const int steps = game.steps();
  const int m1 = game.spec().m1();
  const int max_it = options.max_iterations > 0 ? options.max_iterations
                                                : 4 * steps * m1 + 100;
  const ControlPath zero = Zeros(steps, m1);
  auto hess = [&](const ControlPath& d) {
    return ReducedGradient(d, game, true);
  };

  ControlPath u = zero;
  ControlPath r = ReducedGradient(u, game);  // gradient at u
  for (auto& e : r) e = -e;
  ControlPath d = r;
  double rr = Dot(r, r);
  int it = 0;
  while (std::sqrt(rr) > options.tolerance) {
    if (it >= max_it) {
      throw SolverError(ErrorCode::kMaxIterations, "gradient", std::sqrt(rr),
                        "conjugate gradients did not reach tolerance");
    }
    const ControlPath hd = hess(d);
    const double alpha = rr / Dot(d, hd);
    for (int k = 0; k < steps; ++k) {
      u[k] += alpha * d[k];
      r[k] -= alpha * hd[k];
    }
    ++it;
    // Refresh the residual now and then to stop rounding drift.
    if (it % 50 == 0) {
      r = ReducedGradient(u, game);
      for (auto& e : r) e = -e;
    }
    const double rr_new = Dot(r, r);
    const double beta = rr_new / rr;
    rr = rr_new;
    for (int k = 0; k < steps; ++k) d[k] = r[k] + beta * d[k];
  }

  LeaderSolution sol;
  sol.u = std::move(u);
  sol.follower = FollowerBestResponse(sol.u, game);
  sol.J1 = sol.follower.J1;
  sol.gradient_norm = std::sqrt(Dot(ReducedGradient(sol.u, game),
                                    ReducedGradient(sol.u, game)));
  sol.iterations = it;
  return sol;
}

std::vector<ConvergenceRow> ConvergenceReport(const GameSpec& raw,
                                              const std::vector<int>& n_list,
                                              int workers) {
  const GameSpec spec = ValidateSpec(raw);
  if (!spec.IsDeterministic()) {
    throw SolverError(ErrorCode::kRequiresDeterministic, "C",
                      spec.C.cwiseAbs().maxCoeff(),
                      "the convergence study needs C = 0");
  }
  for (std::size_t i = 1; i < n_list.size(); ++i) {
    if (n_list[i] <= n_list[i - 1]) {
      throw SolverError(ErrorCode::kConfig, "N", n_list[i],
                        "grid sizes must be ascending");
    }
  }
  const RiccatiSystem system = HatRiccatiSystem(AssembleHat(spec));
  std::vector<ConvergenceRow> rows(n_list.size());
  ParallelBlocks(static_cast<int>(n_list.size()), workers,
                 [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      const TimeGrid grid(spec.T, n_list[i]);
      const DiscreteGame game(spec, grid);
      const LeaderSolution disc = LeaderSolve(game);

      const RiccatiSolution sol = SolveRiccati(system, grid);
      const FeedbackLaw law = Synthesize(sol, spec);
      const std::vector<VectorXd> mean = MeanPath(sol, spec);
      std::vector<VectorXd> u_cont(grid.steps());
      for (int k = 0; k < grid.steps(); ++k) u_cont[k] = law.U(k, mean[k]);

      ConvergenceRow& row = rows[i];
      row.N = n_list[i];
      row.J1_disc = disc.J1;
      row.J1_cont = CostsMoment(sol, spec, grid).J1;
      row.abs_err = std::abs(row.J1_disc - row.J1_cont);
      row.control_gap = SupGap(disc.u, u_cont);
    }
  });
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].order = std::numeric_limits<double>::quiet_NaN();
    if (i == 0 || rows[i].abs_err == 0.0 || rows[i - 1].abs_err == 0.0) {
      continue;
    }
    rows[i].order = std::log(rows[i - 1].abs_err / rows[i].abs_err) /
                    std::log(static_cast<double>(rows[i].N) / rows[i - 1].N);
  }
  return rows;
}

}  // namespace stackelq
