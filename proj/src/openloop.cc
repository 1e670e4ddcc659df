#include "stackelq/openloop.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "internal.h"
#include "stackelq/errors.h"
#include "stackelq/noise.h"
#include "stackelq/parallel.h"

namespace stackelq {
namespace {

using internal::RunningMean;
using internal::TrapezoidWeight;

void RequireSameGrid(const TimeGrid& a, const TimeGrid& b) {
  if (a.steps() != b.steps() || a.horizon() != b.horizon()) {
    throw SolverError(ErrorCode::kDimensionMismatch, "grid", b.steps(),
                      "grid does not match the Riccati solution's grid");
  }
}

void RequireDeterministic(const GameSpec& spec, const char* what) {
  if (!spec.IsDeterministic()) {
    throw SolverError(ErrorCode::kRequiresDeterministic, "C",
                      spec.C.cwiseAbs().maxCoeff(),
                      std::string(what) + " needs C = 0");
  }
}

double Quadratic(const MatrixXd& w, const VectorXd& z) { return z.dot(w * z); }

MatrixXd LeaderGain(const GameSpec& spec) {
  return -spec.R1.llt().solve(spec.B1.transpose());
}

MatrixXd FollowerGain(const GameSpec& spec) {
  return -spec.R2.llt().solve(spec.B2.transpose());
}

// Piecewise-constant perturbation direction, w_N = w_{N-1}.
std::vector<VectorXd> Direction(std::uint64_t seed, int direction, int m1,
                                int steps) {
  std::vector<VectorXd> w(steps + 1, VectorXd(m1));
  for (int k = 0; k < steps; ++k) {
    for (int i = 0; i < m1; ++i) {
      w[k](i) = StandardNormal(seed, NoiseStream::kPerturbation, direction,
                               static_cast<std::uint64_t>(k) * m1 + i);
    }
  }
  w[steps] = w[steps - 1];
  return w;
}

double LeaderCostAlong(const std::vector<VectorXd>& x,
                       const std::vector<VectorXd>& u, const GameSpec& spec,
                       const TimeGrid& grid) {
  const int steps = grid.steps();
  double running = 0.0;
  for (int k = 0; k <= steps; ++k) {
    running += TrapezoidWeight(k, steps, grid.step()) * 0.5 *
               (Quadratic(spec.Q1, x[k]) + Quadratic(spec.R1, u[k]));
  }
  return running + 0.5 * Quadratic(spec.G1, x[steps]);
}

}  // namespace

VectorXd FeedbackLaw::U(int k, const VectorXd& xh) const {
  VectorXd u = u_gain[k] * xh;
  if (!u_offset.empty()) u += u_offset[k];
  return u;
}

VectorXd FeedbackLaw::V(int k, const VectorXd& xh) const {
  return v_gain[k] * xh;
}

FeedbackLaw Synthesize(const RiccatiSolution& sol, const GameSpec& spec) {
  const int n = spec.n();
  if (sol.tag() != SystemTag::kHat || sol.dim() != 2 * n) {
    throw SolverError(ErrorCode::kDimensionMismatch, "K", sol.dim(),
                      "synthesis needs a hat-system Riccati solution");
  }
  const MatrixXd lu = LeaderGain(spec);
  const MatrixXd lv = FollowerGain(spec);
  FeedbackLaw law;
  law.riccati = std::make_shared<RiccatiSolution>(sol);
  law.u_gain.reserve(sol.nodes().size());
  law.v_gain.reserve(sol.nodes().size());
  for (const MatrixXd& K : sol.nodes()) {
    law.u_gain.push_back(lu * K.topRows(n));
    law.v_gain.push_back(lv * K.bottomRows(n));
  }
  return law;
}

TrajectoryEnsemble::TrajectoryEnsemble(TimeGrid grid, int n_paths,
                                       std::uint64_t seed,
                                       std::shared_ptr<const FeedbackLaw> law,
                                       MatrixXd chat)
    : grid_(grid),
      n_paths_(n_paths),
      seed_(seed),
      dim_(static_cast<int>(chat.rows())),
      law_(std::move(law)),
      chat_(std::move(chat)),
      xhat_(static_cast<std::size_t>(n_paths) * grid.num_nodes() * dim_, 0.0),
      dw_(static_cast<std::size_t>(n_paths) * grid.num_nodes(), 0.0) {}

Eigen::Map<const VectorXd> TrajectoryEnsemble::XHat(int path, int k) const {
  return Eigen::Map<const VectorXd>(xhat_.data() + Index(path, k) * dim_,
                                    dim_);
}

Eigen::Map<VectorXd> TrajectoryEnsemble::MutableXHat(int path, int k) {
  return Eigen::Map<VectorXd>(xhat_.data() + Index(path, k) * dim_, dim_);
}

VectorXd TrajectoryEnsemble::PHat(int path, int k) const {
  return law_->riccati->at(k) * XHat(path, k);
}

VectorXd TrajectoryEnsemble::QHat(int path, int k) const {
  return law_->riccati->at(k) * (chat_ * XHat(path, k));
}

TrajectoryEnsemble Simulate(const FeedbackLaw& law, const GameSpec& spec,
                            const TimeGrid& grid, int n_paths,
                            std::uint64_t seed, int workers) {
  if (n_paths < 1) {
    throw SolverError(ErrorCode::kConfig, "paths", n_paths,
                      "need at least one path");
  }
  RequireSameGrid(law.riccati->grid(), grid);
  const int n = spec.n();
  const int steps = grid.steps();
  const double h = grid.step();
  const double sqrt_h = std::sqrt(h);
  const HatSystem hat = AssembleHat(spec);

  std::vector<MatrixXd> drift(steps);
  for (int k = 0; k < steps; ++k) {
    drift[k] = hat.Ahat - hat.Bhat * law.riccati->at(k);
  }
  std::vector<VectorXd> forcing;
  if (!law.u_offset.empty()) {
    forcing.assign(steps, VectorXd::Zero(2 * n));
    for (int k = 0; k < steps; ++k) {
      forcing[k].head(n) = h * (spec.B1 * law.u_offset[k]);
    }
  }

  TrajectoryEnsemble ens(grid, n_paths, seed,
                         std::make_shared<FeedbackLaw>(law), hat.Chat);
  VectorXd start = VectorXd::Zero(2 * n);
  start.head(n) = spec.x0;

  ParallelBlocks(n_paths, workers, [&](int begin, int end) {
    VectorXd xh(2 * n);
    for (int path = begin; path < end; ++path) {
      xh = start;
      ens.MutableXHat(path, 0) = xh;
      for (int k = 0; k < steps; ++k) {
        const double dw =
            sqrt_h * StandardNormal(seed, NoiseStream::kBrownian, path, k);
        ens.MutableDeltaW(path, k) = dw;
        VectorXd next = xh + h * (drift[k] * xh) + dw * (hat.Chat * xh);
        if (!forcing.empty()) next += forcing[k];
        if (!next.allFinite() ||
            next.cwiseAbs().maxCoeff() > kBlowUpThreshold) {
          throw SolverError(ErrorCode::kBlowUp, "t", grid.t(k + 1),
                            "simulated state blew up on path " +
                                std::to_string(path));
        }
        xh = std::move(next);
        ens.MutableXHat(path, k + 1) = xh;
      }
    }
  });
  return ens;
}

std::vector<PathCosts> PathCostsOf(const TrajectoryEnsemble& ens,
                                   const GameSpec& spec, int workers) {
  const TimeGrid& grid = ens.grid();
  const int steps = grid.steps();
  std::vector<PathCosts> out(ens.n_paths());
  ParallelBlocks(ens.n_paths(), workers, [&](int begin, int end) {
    for (int path = begin; path < end; ++path) {
      double j1 = 0.0, j2 = 0.0;
      for (int k = 0; k <= steps; ++k) {
        const VectorXd x = ens.X(path, k);
        const double w = TrapezoidWeight(k, steps, grid.step());
        j1 += w * 0.5 *
              (Quadratic(spec.Q1, x) + Quadratic(spec.R1, ens.U(path, k)));
        j2 += w * 0.5 *
              (Quadratic(spec.Q2, x) + Quadratic(spec.R2, ens.V(path, k)));
      }
      const VectorXd xt = ens.X(path, steps);
      out[path].J1 = j1 + 0.5 * Quadratic(spec.G1, xt);
      out[path].J2 = j2 + 0.5 * Quadratic(spec.G2, xt);
    }
  });
  return out;
}

CostEstimate Summarize(const std::vector<PathCosts>& per_path) {
  RunningMean m1, m2;
  for (const PathCosts& c : per_path) {
    m1.Add(c.J1);
    m2.Add(c.J2);
  }
  CostEstimate est;
  est.J1 = m1.mean();
  est.J2 = m2.mean();
  est.se1 = m1.StandardError();
  est.se2 = m2.StandardError();
  est.n_paths = static_cast<int>(per_path.size());
  return est;
}

CostEstimate CostsMc(const TrajectoryEnsemble& ens, const GameSpec& spec,
                     int workers) {
  return Summarize(PathCostsOf(ens, spec, workers));
}

MomentCosts CostsMoment(const RiccatiSolution& sol, const GameSpec& spec,
                        const TimeGrid& grid) {
  RequireSameGrid(sol.grid(), grid);
  const int n = spec.n();
  const HatSystem hat = AssembleHat(spec);
  const MatrixXd lu = LeaderGain(spec);
  const MatrixXd lv = FollowerGain(spec);
  const MatrixXd q1 = EmbedTopLeft(spec.Q1);
  const MatrixXd q2 = EmbedTopLeft(spec.Q2);

  struct Rate {
    MatrixXd dS;
    double j1, j2;
  };
  auto rate = [&](const MatrixXd& K, const MatrixXd& S) {
    const MatrixXd gu = lu * K.topRows(n);
    const MatrixXd gv = lv * K.bottomRows(n);
    const MatrixXd M = hat.Ahat - hat.Bhat * K;
    const MatrixXd w1 = q1 + gu.transpose() * spec.R1 * gu;
    const MatrixXd w2 = q2 + gv.transpose() * spec.R2 * gv;
    Rate r;
    r.dS = M * S + S * M.transpose() + hat.Chat * S * hat.Chat.transpose();
    r.j1 = 0.5 * (w1 * S).trace();
    r.j2 = 0.5 * (w2 * S).trace();
    return r;
  };

  VectorXd xh0 = VectorXd::Zero(2 * n);
  xh0.head(n) = spec.x0;
  MatrixXd S = xh0 * xh0.transpose();
  double j1 = 0.0, j2 = 0.0;
  const double h = grid.step();
  for (int k = 0; k < grid.steps(); ++k) {
    const MatrixXd& k0 = sol.at(k);
    const MatrixXd kmid = sol.Hermite(k, 0.5);
    const MatrixXd& k1 = sol.at(k + 1);
    const Rate r1 = rate(k0, S);
    const Rate r2 = rate(kmid, S + 0.5 * h * r1.dS);
    const Rate r3 = rate(kmid, S + 0.5 * h * r2.dS);
    const Rate r4 = rate(k1, S + h * r3.dS);
    S += (h / 6.0) * (r1.dS + 2.0 * r2.dS + 2.0 * r3.dS + r4.dS);
    j1 += (h / 6.0) * (r1.j1 + 2.0 * r2.j1 + 2.0 * r3.j1 + r4.j1);
    j2 += (h / 6.0) * (r1.j2 + 2.0 * r2.j2 + 2.0 * r3.j2 + r4.j2);
    if (!S.allFinite() || S.cwiseAbs().maxCoeff() > kBlowUpThreshold) {
      throw SolverError(ErrorCode::kBlowUp, "t", grid.t(k + 1),
                        "second moment blew up");
    }
  }
  MomentCosts out;
  out.J1 = j1 + 0.5 * (EmbedTopLeft(spec.G1) * S).trace();
  out.J2 = j2 + 0.5 * (EmbedTopLeft(spec.G2) * S).trace();
  return out;
}

std::vector<VectorXd> MeanPath(const RiccatiSolution& sol,
                               const GameSpec& spec) {
  const int n = spec.n();
  const TimeGrid& grid = sol.grid();
  const HatSystem hat = AssembleHat(spec);
  const double h = grid.step();
  std::vector<VectorXd> path(grid.num_nodes());
  path[0] = VectorXd::Zero(2 * n);
  path[0].head(n) = spec.x0;
  for (int k = 0; k < grid.steps(); ++k) {
    const MatrixXd m0 = hat.Ahat - hat.Bhat * sol.at(k);
    const MatrixXd mm = hat.Ahat - hat.Bhat * sol.Hermite(k, 0.5);
    const MatrixXd m1 = hat.Ahat - hat.Bhat * sol.at(k + 1);
    const VectorXd& z = path[k];
    const VectorXd f1 = m0 * z;
    const VectorXd f2 = mm * (z + 0.5 * h * f1);
    const VectorXd f3 = mm * (z + 0.5 * h * f2);
    const VectorXd f4 = m1 * (z + h * f3);
    path[k + 1] = z + (h / 6.0) * (f1 + 2.0 * f2 + 2.0 * f3 + f4);
  }
  return path;
}

double GradientResidual(const TrajectoryEnsemble& ens, const GameSpec& spec,
                        AdjointSource source) {
  if (source == AdjointSource::kIndependent) {
    RequireDeterministic(spec, "independent adjoint recomputation");
  }
  const int n = spec.n();
  const TimeGrid& grid = ens.grid();
  const int steps = grid.steps();
  const double h = grid.step();
  const MatrixXd at = spec.A.transpose();
  const MatrixXd b1t = spec.B1.transpose();

  RunningMean mean;
  std::vector<VectorXd> p1(steps + 1);
  for (int path = 0; path < ens.n_paths(); ++path) {
    if (source == AdjointSource::kRiccati) {
      for (int k = 0; k <= steps; ++k) p1[k] = ens.PHat(path, k).head(n);
    } else {
      p1[steps] = spec.G1 * ens.X(path, steps) - spec.G2 * ens.Y(path, steps);
      for (int k = steps - 1; k >= 0; --k) {
        p1[k] = p1[k + 1] + h * (at * p1[k + 1] -
                                 spec.Q2 * ens.Y(path, k + 1) +
                                 spec.Q1 * ens.X(path, k + 1));
      }
    }
    double integral = 0.0;
    for (int k = 0; k <= steps; ++k) {
      const VectorXd r = spec.R1 * ens.U(path, k) + b1t * p1[k];
      integral += TrapezoidWeight(k, steps, h) * r.squaredNorm();
    }
    mean.Add(integral);
  }
  return std::sqrt(mean.mean());
}

double BackwardDefect(const TrajectoryEnsemble& ens, const GameSpec& spec) {
  const HatSystem hat = AssembleHat(spec);
  const TimeGrid& grid = ens.grid();
  const double h = grid.step();
  const MatrixXd at = hat.Ahat.transpose();
  const MatrixXd ct = hat.Chat.transpose();
  RunningMean mean;
  for (int path = 0; path < ens.n_paths(); ++path) {
    VectorXd accumulated = VectorXd::Zero(2 * spec.n());
    double worst = 0.0;
    VectorXd p_next = ens.PHat(path, grid.steps());
    for (int k = grid.steps() - 1; k >= 0; --k) {
      const VectorXd p = ens.PHat(path, k);
      const VectorXd q = ens.QHat(path, k);
      const VectorXd step = -(at * p + ct * q + hat.Qhat * ens.XHat(path, k)) *
                                h +
                            q * ens.DeltaW(path, k);
      accumulated += p_next - p - step;
      worst = std::max(worst, accumulated.cwiseAbs().maxCoeff());
      p_next = p;
    }
    mean.Add(worst * worst);
  }
  return std::sqrt(mean.mean());
}

FollowerResponse SolveFollowerSweeps(const std::vector<VectorXd>& u_path,
                                     const GameSpec& spec,
                                     const TimeGrid& grid,
                                     const SweepOptions& options) {
  RequireDeterministic(spec, "follower sweeps");
  const int steps = grid.steps();
  if (static_cast<int>(u_path.size()) != steps + 1) {
    throw SolverError(ErrorCode::kDimensionMismatch, "u", u_path.size(),
                      "leader control path needs N + 1 nodes");
  }
  const int n = spec.n();
  const double h = grid.step();
  const MatrixXd lv = FollowerGain(spec);
  const MatrixXd at = spec.A.transpose();

  FollowerResponse out;
  out.x.assign(steps + 1, VectorXd::Zero(n));
  out.p2.assign(steps + 1, VectorXd::Zero(n));
  std::vector<VectorXd> p_new(steps + 1);

  auto forward = [&] {
    out.x[0] = spec.x0;
    for (int k = 0; k < steps; ++k) {
      out.x[k + 1] = out.x[k] + h * (spec.A * out.x[k] + spec.B1 * u_path[k] +
                                     spec.B2 * (lv * out.p2[k]));
    }
  };

  bool converged = false;
  for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    forward();
    p_new[steps] = spec.G2 * out.x[steps];
    for (int k = steps - 1; k >= 0; --k) {
      p_new[k] = p_new[k + 1] + h * (at * p_new[k + 1] + spec.Q2 * out.x[k + 1]);
    }
    double update = 0.0;
    for (int k = 0; k <= steps; ++k) {
      const VectorXd diff = p_new[k] - out.p2[k];
      update = std::max(update, diff.cwiseAbs().maxCoeff());
      out.p2[k] += options.damping * diff;
    }
    out.sweeps = sweep;
    if (!std::isfinite(update)) break;
    if (update < options.tolerance) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw SolverError(ErrorCode::kFollowerIterationDiverged, "sweeps",
                      out.sweeps, "follower sweeps did not converge");
  }
  forward();
  out.v.reserve(steps + 1);
  for (int k = 0; k <= steps; ++k) out.v.push_back(lv * out.p2[k]);
  return out;
}

double FollowerResponseCheck(const FeedbackLaw& law, const GameSpec& spec,
                             const TimeGrid& grid,
                             const SweepOptions& options) {
  RequireDeterministic(spec, "follower response check");
  const TrajectoryEnsemble ens = Simulate(law, spec, grid, 1, 0);
  std::vector<VectorXd> u_path;
  for (int k = 0; k <= grid.steps(); ++k) u_path.push_back(ens.U(0, k));
  const FollowerResponse resp = SolveFollowerSweeps(u_path, spec, grid, options);
  double gap = 0.0;
  for (int k = 0; k <= grid.steps(); ++k) {
    gap = std::max(gap, (resp.v[k] - ens.V(0, k)).cwiseAbs().maxCoeff());
  }
  return gap;
}

ProbeReport PerturbationProbe(const FeedbackLaw& law, const GameSpec& spec,
                              const TimeGrid& grid, std::uint64_t seed,
                              const ProbeOptions& options) {
  const int steps = grid.steps();
  const int n = spec.n();
  const int m1 = spec.m1();
  const double h = grid.step();
  ProbeReport report;

  if (spec.IsDeterministic()) {
    const TrajectoryEnsemble base = Simulate(law, spec, grid, 1, seed);
    std::vector<VectorXd> u_star;
    for (int k = 0; k <= steps; ++k) u_star.push_back(base.U(0, k));
    auto evaluate = [&](const std::vector<VectorXd>& u) {
      const FollowerResponse resp =
          SolveFollowerSweeps(u, spec, grid, options.sweeps);
      return LeaderCostAlong(resp.x, u, spec, grid);
    };
    const double j0 = evaluate(u_star);
    std::vector<ProbeSample> samples(
        static_cast<std::size_t>(options.directions) * options.eps.size());
    ParallelBlocks(options.directions, options.workers, [&](int b, int e) {
      for (int d = b; d < e; ++d) {
        const std::vector<VectorXd> w = Direction(seed, d, m1, steps);
        for (std::size_t i = 0; i < options.eps.size(); ++i) {
          std::vector<VectorXd> u = u_star;
          for (int k = 0; k <= steps; ++k) u[k] += options.eps[i] * w[k];
          samples[d * options.eps.size() + i] = {d, options.eps[i],
                                                 evaluate(u) - j0};
        }
      }
    });
    report.samples = std::move(samples);
  } else {
    // Follower response to an extra leader input w, linear in w:
    //   dp2 = P dx + phi,  -phi' = (A - S2 P)' phi + P B1 w,  phi(T) = 0.
    const MatrixXd s2 = spec.B2 * spec.R2.llt().solve(spec.B2.transpose());
    const RiccatiSolution follower = SolveRiccati(
        RiccatiSystem{spec.A, s2, spec.C, spec.Q2, spec.G2}, grid);
    const TrajectoryEnsemble base =
        Simulate(law, spec, grid, options.n_paths, seed, options.workers);
    const std::size_t n_eps = options.eps.size();

    std::vector<std::vector<double>> per_path(
        options.directions, std::vector<double>(
                                static_cast<std::size_t>(base.n_paths()) *
                                (n_eps + 1)));
    for (int d = 0; d < options.directions; ++d) {
      const std::vector<VectorXd> w = Direction(seed, d, m1, steps);
      std::vector<VectorXd> phi(steps + 1, VectorXd::Zero(n));
      for (int k = steps - 1; k >= 0; --k) {
        const MatrixXd& P = follower.at(k + 1);
        phi[k] = phi[k + 1] + h * ((spec.A - s2 * P).transpose() * phi[k + 1] +
                                   P * (spec.B1 * w[k]));
      }
      std::vector<double>& out = per_path[d];
      ParallelBlocks(base.n_paths(), options.workers, [&](int b, int e) {
        std::vector<VectorXd> dx(steps + 1);
        std::vector<VectorXd> x(steps + 1), u(steps + 1);
        for (int path = b; path < e; ++path) {
          dx[0] = VectorXd::Zero(n);
          for (int k = 0; k < steps; ++k) {
            dx[k + 1] = dx[k] +
                        h * (spec.A * dx[k] + spec.B1 * w[k] -
                             s2 * (follower.at(k) * dx[k] + phi[k])) +
                        base.DeltaW(path, k) * (spec.C * dx[k]);
          }
          for (std::size_t i = 0; i <= n_eps; ++i) {
            const double eps = i == 0 ? 0.0 : options.eps[i - 1];
            for (int k = 0; k <= steps; ++k) {
              x[k] = base.X(path, k) + eps * dx[k];
              u[k] = base.U(path, k) + eps * w[k];
            }
            out[static_cast<std::size_t>(path) * (n_eps + 1) + i] =
                LeaderCostAlong(x, u, spec, grid);
          }
        }
      });
      std::vector<RunningMean> means(n_eps + 1);
      for (int path = 0; path < base.n_paths(); ++path) {
        for (std::size_t i = 0; i <= n_eps; ++i) {
          means[i].Add(out[static_cast<std::size_t>(path) * (n_eps + 1) + i]);
        }
      }
      for (std::size_t i = 0; i < n_eps; ++i) {
        report.samples.push_back(
            {d, options.eps[i], means[i + 1].mean() - means[0].mean()});
      }
    }
  }

  report.min_delta = report.samples.empty() ? 0.0 : report.samples[0].delta_j1;
  for (const ProbeSample& s : report.samples) {
    report.min_delta = std::min(report.min_delta, s.delta_j1);
  }
  return report;
}

}  // namespace stackelq
