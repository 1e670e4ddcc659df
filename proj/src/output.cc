#include "stackelq/output.h"

#include <cstdio>

namespace stackelq {
namespace {

void Columns(std::ostream& out, const std::string& prefix, int count) {
  for (int i = 1; i <= count; ++i) out << ',' << prefix << i;
}

void Values(std::ostream& out, const VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) out << ',' << FormatDouble(v(i));
}

}  // namespace

std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void WriteRiccatiCsv(std::ostream& out, const RiccatiSolution& sol) {
  const int d = sol.dim();
  out << 't';
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) out << ",K_" << i << '_' << j;
  }
  out << '\n';
  for (int k = 0; k < sol.grid().num_nodes(); ++k) {
    out << FormatDouble(sol.grid().t(k));
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) out << ',' << FormatDouble(sol.at(k)(i, j));
    }
    out << '\n';
  }
}

void WriteTrajectoriesCsv(std::ostream& out, const TrajectoryEnsemble& ens,
                          const GameSpec& spec) {
  const int n = spec.n();
  out << "path,t";
  Columns(out, "x_", n);
  Columns(out, "y_", n);
  Columns(out, "p1_", n);
  Columns(out, "p2_", n);
  Columns(out, "u_", spec.m1());
  Columns(out, "v_", spec.m2());
  out << '\n';
  for (int path = 0; path < ens.n_paths(); ++path) {
    for (int k = 0; k < ens.grid().num_nodes(); ++k) {
      const VectorXd ph = ens.PHat(path, k);
      out << path << ',' << FormatDouble(ens.grid().t(k));
      Values(out, ens.X(path, k));
      Values(out, ens.Y(path, k));
      Values(out, ph.head(n));
      Values(out, ph.tail(n));
      Values(out, ens.U(path, k));
      Values(out, ens.V(path, k));
      out << '\n';
    }
  }
}

void WriteProfileCsv(std::ostream& out, const ClosedLoopProfile& profile) {
  out << "t,xi,eta,zeta,bang\n";
  for (int k = 0; k < profile.grid.num_nodes(); ++k) {
    out << FormatDouble(profile.grid.t(k)) << ',' << FormatDouble(profile.xi[k])
        << ',' << FormatDouble(profile.eta[k]) << ','
        << FormatDouble(profile.zeta[k]) << ',' << FormatDouble(profile.bang[k])
        << '\n';
  }
}

void WriteConvergenceCsv(std::ostream& out,
                         const std::vector<ConvergenceRow>& rows) {
  out << "N,J1_disc,J1_cont,abs_err,order\n";
  for (const ConvergenceRow& r : rows) {
    out << r.N << ',' << FormatDouble(r.J1_disc) << ','
        << FormatDouble(r.J1_cont) << ',' << FormatDouble(r.abs_err) << ','
        << FormatDouble(r.order) << '\n';
  }
}

}  // namespace stackelq
