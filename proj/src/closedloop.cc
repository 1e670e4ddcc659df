#include "stackelq/closedloop.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>

#include "internal.h"
#include "stackelq/augment.h"
#include "stackelq/errors.h"
#include "stackelq/interpolation.h"
#include "stackelq/noise.h"
#include "stackelq/parallel.h"

namespace stackelq {
namespace {

using internal::TrapezoidWeight;

// Scalar coefficients of the profile system.
struct Coeffs {
  double a, b1, c, q1, q2, g1, g2;
  double s1, s2;  // B1^2/R1, B2^2/R2
  double bound;

  explicit Coeffs(const GameSpec& spec, double k_bound)
      : a(spec.A(0, 0)),
        b1(spec.B1(0, 0)),
        c(spec.C(0, 0)),
        q1(spec.Q1(0, 0)),
        q2(spec.Q2(0, 0)),
        g1(spec.G1(0, 0)),
        g2(spec.G2(0, 0)),
        s1(spec.B1(0, 0) * spec.B1(0, 0) / spec.R1(0, 0)),
        s2(spec.B2(0, 0) * spec.B2(0, 0) / spec.R2(0, 0)),
        bound(k_bound) {}

  // Slope used by the integrators. On the switching surface (always the case
  // at t = 0, where xi = 0) it takes the value on the side the profile moves
  // into, so that the first step sees the one-sided limit.
  double Slope(double xi, double eta, double zeta) const {
    const double delta = -b1 * xi * zeta;
    if (delta != 0.0) return Bang(bound, delta);
    const double d_xi = Xi(xi, eta, zeta, 0.0);
    const double d_zeta = Zeta(eta, zeta, 0.0);
    return Bang(bound, -b1 * (d_xi * zeta + xi * d_zeta));
  }
  double Xi(double xi, double eta, double zeta, double s) const {
    return (s1 * eta + s2 * zeta + b1 * s) * xi + s2 * eta;
  }
  double Eta(double xi, double eta, double zeta) const {
    return (s1 * eta + s2 * zeta - 2.0 * a - c * c) * eta + q2 * xi - q1;
  }
  double Zeta(double eta, double zeta, double s) const {
    return (s1 * eta + s2 * zeta - 2.0 * a - c * c - b1 * s) * zeta - q2;
  }
  // Closed-loop drift coefficient of x.
  double Drift(double eta, double zeta) const {
    return a - s1 * eta - s2 * zeta;
  }
};

using State = std::array<double, 3>;  // xi, eta, zeta

State Rates(const Coeffs& co, const State& s) {
  const double slope = co.Slope(s[0], s[1], s[2]);
  return {co.Xi(s[0], s[1], s[2], slope), co.Eta(s[0], s[1], s[2]),
          co.Zeta(s[1], s[2], slope)};
}

State Axpy(const State& y, double h, const State& f) {
  return {y[0] + h * f[0], y[1] + h * f[1], y[2] + h * f[2]};
}

void RequireScalar(const GameSpec& spec) {
  if (!spec.IsScalar()) {
    throw SolverError(ErrorCode::kNotScalar, "n", spec.n(),
                      "the closed-loop solver handles scalar games only");
  }
}

void RequireSameGrid(const TimeGrid& a, const TimeGrid& b) {
  if (a.steps() != b.steps() || a.horizon() != b.horizon()) {
    throw SolverError(ErrorCode::kDimensionMismatch, "grid", b.steps(),
                      "grid does not match the profile's grid");
  }
}

ClosedLoopProfile EmptyProfile(const TimeGrid& grid, double bound) {
  ClosedLoopProfile p;
  p.grid = grid;
  p.bound = bound;
  const std::size_t nodes = grid.num_nodes();
  p.xi.assign(nodes, 0.0);
  p.eta.assign(nodes, 0.0);
  p.zeta.assign(nodes, 0.0);
  p.bang.assign(nodes, 0.0);
  p.eta2.assign(nodes, 0.0);
  p.zeta2.assign(nodes, 0.0);
  return p;
}

void RecordSlopes(const Coeffs& co, ClosedLoopProfile& p) {
  for (std::size_t k = 0; k < p.xi.size(); ++k) {
    p.bang[k] = Bang(co.bound, -co.b1 * p.xi[k] * p.zeta[k]);
  }
}

// Forward RK4 of the full system from (0, eta0, zeta0). Returns the terminal
// residual; fills the profile when asked.
std::array<double, 2> Shoot(const Coeffs& co, const TimeGrid& grid,
                            double eta0, double zeta0,
                            ClosedLoopProfile* out) {
  const double h = grid.step();
  State y{0.0, eta0, zeta0};
  if (out) {
    out->xi[0] = y[0];
    out->eta[0] = y[1];
    out->zeta[0] = y[2];
  }
  for (int k = 0; k < grid.steps(); ++k) {
    const State f1 = Rates(co, y);
    const State f2 = Rates(co, Axpy(y, 0.5 * h, f1));
    const State f3 = Rates(co, Axpy(y, 0.5 * h, f2));
    const State f4 = Rates(co, Axpy(y, h, f3));
    for (int i = 0; i < 3; ++i) {
      y[i] += (h / 6.0) * (f1[i] + 2.0 * f2[i] + 2.0 * f3[i] + f4[i]);
    }
    if (!std::isfinite(y[0]) || !std::isfinite(y[1]) || !std::isfinite(y[2]) ||
        std::abs(y[1]) > kBlowUpThreshold || std::abs(y[2]) > kBlowUpThreshold) {
      return {NAN, NAN};
    }
    if (out) {
      out->xi[k + 1] = y[0];
      out->eta[k + 1] = y[1];
      out->zeta[k + 1] = y[2];
    }
  }
  return {y[1] - (co.g1 - co.g2 * y[0]), y[2] - co.g2};
}

ClosedLoopProfile SolveByShooting(const Coeffs& co, const GameSpec& spec,
                                  const TimeGrid& grid,
                                  const ProfileOptions& options) {
  using Vec2 = Eigen::Vector2d;
  using Mat2 = Eigen::Matrix2d;
  auto residual = [&](const Vec2& z) {
    const std::array<double, 2> r = Shoot(co, grid, z(0), z(1), nullptr);
    return Vec2(r[0], r[1]);
  };
  auto jacobian = [&](const Vec2& z, const Vec2& r0) {
    Mat2 jac;
    for (int j = 0; j < 2; ++j) {
      Vec2 zp = z;
      const double step = 1e-7 * std::max(1.0, std::abs(z(j)));
      zp(j) += step;
      jac.col(j) = (residual(zp) - r0) / step;
    }
    return jac;
  };

  // Start from the open-loop pair, which is the K_b = 0 profile.
  const RiccatiSolution open =
      SolveRiccati(HatRiccatiSystem(AssembleHat(spec)), grid);
  Vec2 z(open.at(0)(0, 0), open.at(0)(1, 0));
  Vec2 r = residual(z);
  if (!r.allFinite()) {
    throw SolverError(ErrorCode::kNoConvergence, "iterations", 0,
                      "shooting start point blew up");
  }
  Mat2 jac = jacobian(z, r);
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    if (r.cwiseAbs().maxCoeff() <= options.tolerance) break;
    Eigen::FullPivLU<Mat2> lu(jac);
    if (!lu.isInvertible()) {
      jac = jacobian(z, r);
      lu.compute(jac);
      if (!lu.isInvertible()) break;
    }
    const Vec2 dz = -lu.solve(r);
    // Backtrack on the residual norm; the switching term makes it kinked.
    double lambda = 1.0;
    Vec2 z_new = z + dz, r_new = residual(z_new);
    for (int b = 0; b < 30 && !(r_new.allFinite() &&
                                r_new.cwiseAbs().maxCoeff() <
                                    r.cwiseAbs().maxCoeff());
         ++b) {
      lambda *= 0.5;
      z_new = z + lambda * dz;
      r_new = residual(z_new);
    }
    if (!r_new.allFinite()) break;
    const Vec2 step = z_new - z;
    if (lambda < 1.0 || it % 8 == 7) {
      jac = jacobian(z_new, r_new);
    } else {
      // Broyden secant update.
      jac += ((r_new - r) - jac * step) * step.transpose() / step.squaredNorm();
    }
    z = z_new;
    r = r_new;
  }
  if (!(r.cwiseAbs().maxCoeff() <= options.tolerance)) {
    throw SolverError(ErrorCode::kNoConvergence, "iterations", it,
                      "shooting stalled at residual " +
                          std::to_string(r.cwiseAbs().maxCoeff()));
  }
  ClosedLoopProfile p = EmptyProfile(grid, co.bound);
  Shoot(co, grid, z(0), z(1), &p);
  p.iterations = it;
  p.last_update = r.cwiseAbs().maxCoeff();
  return p;
}

ClosedLoopProfile SolveByFixedPoint(const Coeffs& co, const TimeGrid& grid,
                                    const ProfileOptions& options) {
  const int steps = grid.steps();
  const double h = grid.step();
  const std::size_t nodes = grid.num_nodes();

  ClosedLoopProfile p = EmptyProfile(grid, co.bound);
  std::vector<double> xi_rate(nodes, 0.0), eta_rate(nodes, 0.0),
      zeta_rate(nodes, 0.0);
  // Slope field frozen for one sweep: at nodes and at step midpoints.
  std::vector<double> slope_node(nodes, 0.0), slope_mid(steps, 0.0);
  std::vector<double> xi_new(nodes);
  std::vector<double> prev_slopes, prev_prev_slopes;
  double damping = options.damping;

  auto xi_at_mid = [&](int k) {
    return HermiteValue(p.xi[k], p.xi[k + 1], xi_rate[k], xi_rate[k + 1], h,
                        0.5);
  };
  auto eta_at_mid = [&](int k) {
    return HermiteValue(p.eta[k], p.eta[k + 1], eta_rate[k], eta_rate[k + 1],
                        h, 0.5);
  };
  auto zeta_at_mid = [&](int k) {
    return HermiteValue(p.zeta[k], p.zeta[k + 1], zeta_rate[k],
                        zeta_rate[k + 1], h, 0.5);
  };

  // Backward RK4 for (eta, zeta) with xi and the slope field frozen.
  auto backward = [&] {
    p.eta[steps] = co.g1 - co.g2 * p.xi[steps];
    p.zeta[steps] = co.g2;
    auto f = [&](double xi, double s, double eta, double zeta) {
      return std::array<double, 2>{co.Eta(xi, eta, zeta),
                                   co.Zeta(eta, zeta, s)};
    };
    for (int k = steps - 1; k >= 0; --k) {
      const double xm = xi_at_mid(k);
      const double e = p.eta[k + 1], z = p.zeta[k + 1];
      const auto f1 = f(p.xi[k + 1], slope_node[k + 1], e, z);
      const auto f2 =
          f(xm, slope_mid[k], e - 0.5 * h * f1[0], z - 0.5 * h * f1[1]);
      const auto f3 =
          f(xm, slope_mid[k], e - 0.5 * h * f2[0], z - 0.5 * h * f2[1]);
      const auto f4 = f(p.xi[k], slope_node[k], e - h * f3[0], z - h * f3[1]);
      p.eta[k] = e - (h / 6.0) * (f1[0] + 2.0 * f2[0] + 2.0 * f3[0] + f4[0]);
      p.zeta[k] = z - (h / 6.0) * (f1[1] + 2.0 * f2[1] + 2.0 * f3[1] + f4[1]);
    }
    for (std::size_t k = 0; k < nodes; ++k) {
      eta_rate[k] = co.Eta(p.xi[k], p.eta[k], p.zeta[k]);
      zeta_rate[k] = co.Zeta(p.eta[k], p.zeta[k], slope_node[k]);
    }
  };

  auto refresh_xi_side = [&] {
    for (std::size_t k = 0; k < nodes; ++k) {
      slope_node[k] = co.Slope(p.xi[k], p.eta[k], p.zeta[k]);
      xi_rate[k] = co.Xi(p.xi[k], p.eta[k], p.zeta[k], slope_node[k]);
    }
    for (int k = 0; k < steps; ++k) {
      slope_mid[k] = co.Slope(xi_at_mid(k), eta_at_mid(k), zeta_at_mid(k));
    }
  };

  bool converged = false;
  int it = 0;
  double update = INFINITY;
  for (it = 1; it <= options.max_iterations; ++it) {
    backward();

    // Forward RK4 for xi with (eta, zeta) and the slope field frozen.
    xi_new[0] = 0.0;
    for (int k = 0; k < steps; ++k) {
      const double em = eta_at_mid(k), zm = zeta_at_mid(k);
      const double x = xi_new[k];
      const double f1 = co.Xi(x, p.eta[k], p.zeta[k], slope_node[k]);
      const double f2 = co.Xi(x + 0.5 * h * f1, em, zm, slope_mid[k]);
      const double f3 = co.Xi(x + 0.5 * h * f2, em, zm, slope_mid[k]);
      const double f4 =
          co.Xi(x + h * f3, p.eta[k + 1], p.zeta[k + 1], slope_node[k + 1]);
      xi_new[k + 1] = x + (h / 6.0) * (f1 + 2.0 * f2 + 2.0 * f3 + f4);
    }

    update = 0.0;
    for (std::size_t k = 0; k < nodes; ++k) {
      update = std::max(update, std::abs(xi_new[k] - p.xi[k]));
      p.xi[k] += damping * (xi_new[k] - p.xi[k]);
    }
    if (!std::isfinite(update) || update > kBlowUpThreshold) break;
    refresh_xi_side();

    if (update < options.tolerance) {
      converged = true;
      break;
    }
    // A slope field that flips back to the one from two sweeps ago is
    // chattering; halve the damping.
    if (!prev_prev_slopes.empty() && slope_node == prev_prev_slopes &&
        slope_node != prev_slopes) {
      damping *= 0.5;
    }
    prev_prev_slopes = std::move(prev_slopes);
    prev_slopes = slope_node;
  }
  if (!converged) {
    throw SolverError(ErrorCode::kNoConvergence, "iterations",
                      std::min(it, options.max_iterations),
                      "fixed-point sweeps stalled at update " +
                          std::to_string(update));
  }
  // Final backward pass so the terminal conditions hold for the returned xi.
  backward();
  p.iterations = it;
  p.last_update = update;
  return p;
}

}  // namespace

double Bang(double bound, double delta) {
  if (delta > 0.0) return -bound + 0.0;
  if (delta < 0.0) return bound + 0.0;
  return 0.0;
}

ClosedLoopProfile SolveProfile(const GameSpec& spec, const TimeGrid& grid,
                               double bound, const ProfileOptions& options) {
  RequireScalar(spec);
  if (!(bound >= 0.0) || !std::isfinite(bound)) {
    throw SolverError(ErrorCode::kConfig, "bound", bound,
                      "slope bound must be nonnegative");
  }
  const Coeffs co(spec, bound);
  ClosedLoopProfile p = options.method == ProfileMethod::kShooting
                            ? SolveByShooting(co, spec, grid, options)
                            : SolveByFixedPoint(co, grid, options);
  RecordSlopes(co, p);
  return p;
}

ProfileRates ProfileDerivatives(const ClosedLoopProfile& profile,
                                const GameSpec& spec) {
  const Coeffs co(spec, profile.bound);
  ProfileRates r;
  const std::size_t nodes = profile.xi.size();
  r.xi.resize(nodes);
  r.eta.resize(nodes);
  r.zeta.resize(nodes);
  for (std::size_t k = 0; k < nodes; ++k) {
    const double s = co.Slope(profile.xi[k], profile.eta[k], profile.zeta[k]);
    r.xi[k] = co.Xi(profile.xi[k], profile.eta[k], profile.zeta[k], s);
    r.eta[k] = co.Eta(profile.xi[k], profile.eta[k], profile.zeta[k]);
    r.zeta[k] = co.Zeta(profile.eta[k], profile.zeta[k], s);
  }
  return r;
}

namespace {

// Closed-loop drift coefficient a(t) = A - b1 eta - b2 zeta at node k and at
// the midpoint of step k (Hermite reconstruction of eta and zeta).
struct DriftField {
  std::vector<double> node, mid;
};

DriftField DriftOf(const ClosedLoopProfile& profile, const GameSpec& spec) {
  const Coeffs co(spec, profile.bound);
  const ProfileRates rates = ProfileDerivatives(profile, spec);
  const double h = profile.grid.step();
  DriftField d;
  const int steps = profile.grid.steps();
  d.node.resize(steps + 1);
  d.mid.resize(steps);
  for (int k = 0; k <= steps; ++k) {
    d.node[k] = co.Drift(profile.eta[k], profile.zeta[k]);
  }
  for (int k = 0; k < steps; ++k) {
    const double em = HermiteValue(profile.eta[k], profile.eta[k + 1],
                                   rates.eta[k], rates.eta[k + 1], h, 0.5);
    const double zm = HermiteValue(profile.zeta[k], profile.zeta[k + 1],
                                   rates.zeta[k], rates.zeta[k + 1], h, 0.5);
    d.mid[k] = co.Drift(em, zm);
  }
  return d;
}

}  // namespace

ClosedLoopLaw SynthesizeClosed(const ClosedLoopProfile& profile,
                               const GameSpec& spec, const TimeGrid& grid) {
  RequireScalar(spec);
  RequireSameGrid(profile.grid, grid);
  const DriftField drift = DriftOf(profile, spec);
  const double h = grid.step();
  const int steps = grid.steps();

  ClosedLoopLaw law;
  law.profile = std::make_shared<ClosedLoopProfile>(profile);
  law.leader_gain = spec.B1(0, 0) / spec.R1(0, 0);
  law.follower_gain = spec.B2(0, 0) / spec.R2(0, 0);
  law.nominal.resize(steps + 1);
  law.nominal[0] = spec.x0(0);
  for (int k = 0; k < steps; ++k) {
    // Linear scalar ODE x' = a(t) x by RK4.
    const double x = law.nominal[k];
    const double f1 = drift.node[k] * x;
    const double f2 = drift.mid[k] * (x + 0.5 * h * f1);
    const double f3 = drift.mid[k] * (x + 0.5 * h * f2);
    const double f4 = drift.node[k + 1] * (x + h * f3);
    law.nominal[k + 1] = x + (h / 6.0) * (f1 + 2.0 * f2 + 2.0 * f3 + f4);
  }
  law.slope = profile.bang;
  law.offset.resize(steps + 1);
  for (int k = 0; k <= steps; ++k) {
    law.offset[k] = -law.slope[k] * law.nominal[k] -
                    law.leader_gain * profile.eta[k] * law.nominal[k];
  }
  return law;
}

ClosedLoopEnsemble::ClosedLoopEnsemble(TimeGrid grid, int n_paths,
                                       std::uint64_t seed,
                                       std::shared_ptr<const ClosedLoopLaw> law,
                                       double c)
    : grid_(grid),
      n_paths_(n_paths),
      seed_(seed),
      law_(std::move(law)),
      c_(c),
      x_(static_cast<std::size_t>(n_paths) * grid.num_nodes(), 0.0),
      x_star_(x_.size(), 0.0),
      dw_(x_.size(), 0.0) {}

ClosedLoopRun SimulateClosed(const ClosedLoopLaw& law, const GameSpec& spec,
                             const TimeGrid& grid, int n_paths,
                             std::uint64_t seed, int workers) {
  RequireScalar(spec);
  RequireSameGrid(law.profile->grid, grid);
  if (n_paths < 1) {
    throw SolverError(ErrorCode::kConfig, "paths", n_paths,
                      "need at least one path");
  }
  const Coeffs co(spec, law.profile->bound);
  const double b2 = spec.B2(0, 0);
  const int steps = grid.steps();
  const double h = grid.step();
  const double sqrt_h = std::sqrt(h);

  ClosedLoopRun run{ClosedLoopEnsemble(grid, n_paths, seed,
                                       std::make_shared<ClosedLoopLaw>(law),
                                       co.c),
                    {}};
  ClosedLoopEnsemble& ens = run.ensemble;
  const ClosedLoopProfile& prof = *law.profile;
  std::vector<PathCosts> per_path(n_paths);

  ParallelBlocks(n_paths, workers, [&](int begin, int end) {
    for (int path = begin; path < end; ++path) {
      double x = spec.x0(0), xs = spec.x0(0);
      ens.MutableX(path, 0) = x;
      ens.MutableXStar(path, 0) = xs;
      for (int k = 0; k < steps; ++k) {
        const double dw =
            sqrt_h * StandardNormal(seed, NoiseStream::kBrownian, path, k);
        ens.MutableDeltaW(path, k) = dw;
        const double u = law.U(k, x, xs);
        const double v = law.V(k, x);
        const double x_next =
            x + h * (co.a * x + co.b1 * u + b2 * v) + co.c * x * dw;
        const double xs_next =
            xs + h * co.Drift(prof.eta[k], prof.zeta[k]) * xs + co.c * xs * dw;
        if (!std::isfinite(x_next) || std::abs(x_next) > kBlowUpThreshold) {
          throw SolverError(ErrorCode::kBlowUp, "t", grid.t(k + 1),
                            "closed-loop state blew up on path " +
                                std::to_string(path));
        }
        x = x_next;
        xs = xs_next;
        ens.MutableX(path, k + 1) = x;
        ens.MutableXStar(path, k + 1) = xs;
      }
      double j1 = 0.0, j2 = 0.0;
      for (int k = 0; k <= steps; ++k) {
        const double xk = ens.X(path, k);
        const double uk = ens.U(path, k);
        const double vk = ens.V(path, k);
        const double w = TrapezoidWeight(k, steps, h);
        j1 += w * 0.5 * (co.q1 * xk * xk + spec.R1(0, 0) * uk * uk);
        j2 += w * 0.5 * (co.q2 * xk * xk + spec.R2(0, 0) * vk * vk);
      }
      const double xt = ens.X(path, steps);
      per_path[path] = {j1 + 0.5 * co.g1 * xt * xt, j2 + 0.5 * co.g2 * xt * xt};
    }
  });
  run.costs = Summarize(per_path);
  return run;
}

MomentCosts ClosedCostsMoment(const ClosedLoopProfile& profile,
                              const GameSpec& spec) {
  RequireScalar(spec);
  const Coeffs co(spec, profile.bound);
  const ProfileRates rates = ProfileDerivatives(profile, spec);
  const TimeGrid& grid = profile.grid;
  const double h = grid.step();
  const double r1 = spec.R1(0, 0), r2 = spec.R2(0, 0);
  const double l1 = spec.B1(0, 0) / r1, l2 = spec.B2(0, 0) / r2;

  // (d/dt)(E x^2, J1, J2) given eta and zeta.
  auto rate = [&](double eta, double zeta, double m) {
    const double a = co.Drift(eta, zeta);
    const double u_gain = l1 * eta, v_gain = l2 * zeta;
    return std::array<double, 3>{
        (2.0 * a + co.c * co.c) * m,
        0.5 * (co.q1 + r1 * u_gain * u_gain) * m,
        0.5 * (co.q2 + r2 * v_gain * v_gain) * m};
  };
  double m = spec.x0(0) * spec.x0(0), j1 = 0.0, j2 = 0.0;
  for (int k = 0; k < grid.steps(); ++k) {
    const double em = HermiteValue(profile.eta[k], profile.eta[k + 1],
                                   rates.eta[k], rates.eta[k + 1], h, 0.5);
    const double zm = HermiteValue(profile.zeta[k], profile.zeta[k + 1],
                                   rates.zeta[k], rates.zeta[k + 1], h, 0.5);
    const auto f1 = rate(profile.eta[k], profile.zeta[k], m);
    const auto f2 = rate(em, zm, m + 0.5 * h * f1[0]);
    const auto f3 = rate(em, zm, m + 0.5 * h * f2[0]);
    const auto f4 = rate(profile.eta[k + 1], profile.zeta[k + 1], m + h * f3[0]);
    m += (h / 6.0) * (f1[0] + 2.0 * f2[0] + 2.0 * f3[0] + f4[0]);
    j1 += (h / 6.0) * (f1[1] + 2.0 * f2[1] + 2.0 * f3[1] + f4[1]);
    j2 += (h / 6.0) * (f1[2] + 2.0 * f2[2] + 2.0 * f3[2] + f4[2]);
    if (!std::isfinite(m) || m > kBlowUpThreshold) {
      throw SolverError(ErrorCode::kBlowUp, "t", grid.t(k + 1),
                        "closed-loop second moment blew up");
    }
  }
  return {j1 + 0.5 * co.g1 * m, j2 + 0.5 * co.g2 * m};
}

double ClosedRepresentationDefect(const ClosedLoopEnsemble& ens,
                                  const GameSpec& spec) {
  RequireScalar(spec);
  const ClosedLoopProfile& prof = *ens.law().profile;
  const Coeffs co(spec, prof.bound);
  const double h = ens.grid().step();
  internal::RunningMean mean;
  for (int path = 0; path < ens.n_paths(); ++path) {
    std::array<double, 3> acc{0.0, 0.0, 0.0};
    double worst = 0.0;
    for (int k = 0; k < ens.grid().steps(); ++k) {
      const double s = prof.bang[k];
      const double x = ens.X(path, k), y = ens.Y(path, k);
      const double p1 = ens.P1(path, k), p2 = ens.P2(path, k);
      const double q1 = ens.Q1(path, k), q2 = ens.Q2(path, k);
      const double dw = ens.DeltaW(path, k);
      const double dy = ((co.a + co.b1 * s) * y + co.s2 * p1) * h + co.c * y * dw;
      const double dp1 =
          -(co.a * p1 + co.c * q1 - co.q2 * y + co.q1 * x) * h + q1 * dw;
      const double dp2 =
          -((co.a + co.b1 * s) * p2 + co.c * q2 + co.q2 * x) * h + q2 * dw;
      acc[0] += ens.Y(path, k + 1) - y - dy;
      acc[1] += ens.P1(path, k + 1) - p1 - dp1;
      acc[2] += ens.P2(path, k + 1) - p2 - dp2;
      worst = std::max({worst, std::abs(acc[0]), std::abs(acc[1]),
                        std::abs(acc[2])});
    }
    mean.Add(worst * worst);
  }
  return std::sqrt(mean.mean());
}

double LeaderHamiltonian(const GameSpec& spec, double u1, double u2, double x,
                         double y, double p1, double p2, double q1, double q2) {
  const double a = spec.A(0, 0), b1 = spec.B1(0, 0), c = spec.C(0, 0);
  const double s2 = spec.B2(0, 0) * spec.B2(0, 0) / spec.R2(0, 0);
  const double ctrl = u2 * x + u1;
  return p1 * ((a + b1 * u2) * x + b1 * u1 - s2 * p2) + c * x * q1 -
         y * ((a + b1 * u2) * p2 + c * q2 + spec.Q2(0, 0) * x) +
         0.5 * (spec.Q1(0, 0) * x * x + spec.R1(0, 0) * ctrl * ctrl);
}

HamiltonianReport HamiltonianScan(const ClosedLoopProfile& profile,
                                  const GameSpec& spec,
                                  const std::vector<HamiltonianSample>& samples,
                                  const std::vector<double>& offsets) {
  RequireScalar(spec);
  constexpr double kDegenerate = 1e-10;
  const double b1 = spec.B1(0, 0), r1 = spec.R1(0, 0), c = spec.C(0, 0);
  const double bound = profile.bound;
  HamiltonianReport report;
  for (const HamiltonianSample& sample : samples) {
    const int k = sample.node;
    const double x = sample.x;
    const double y = profile.xi[k] * x;
    const double p1 = profile.eta[k] * x, p2 = profile.zeta[k] * x;
    const double q1 = (c * profile.eta[k] + profile.eta2[k]) * x;
    const double q2 = (c * profile.zeta[k] + profile.zeta2[k]) * x;
    auto hamiltonian = [&](double u1, double u2) {
      return LeaderHamiltonian(spec, u1, u2, x, y, p1, p2, q1, q2);
    };
    auto best_u1 = [&](double u2) { return -u2 * x - (b1 / r1) * p1; };

    const double u2 = profile.bang[k];
    const double u1_star = best_u1(u2);
    const double h0 = hamiltonian(u1_star, u2);
    for (double d : offsets) {
      for (double sd : {d, -d}) {
        const double err =
            std::abs(hamiltonian(u1_star + sd, u2) - h0 - 0.5 * r1 * sd * sd);
        report.max_curvature_error = std::max(report.max_curvature_error, err);
      }
    }

    ++report.checked;
    const double delta = -b1 * y * p2;
    if (bound == 0.0 || std::abs(profile.SwitchingValue(k, b1)) <= kDegenerate ||
        std::abs(delta) <= kDegenerate) {
      ++report.degenerate;
      continue;
    }
    double best = 0.0, best_value = INFINITY;
    for (double candidate : {-bound, 0.0, bound}) {
      const double value = hamiltonian(best_u1(candidate), candidate);
      if (value < best_value) {
        best_value = value;
        best = candidate;
      }
    }
    if (best != u2) {
      ++report.violations;
      report.violation_nodes.push_back(k);
    }
  }
  return report;
}

}  // namespace stackelq
