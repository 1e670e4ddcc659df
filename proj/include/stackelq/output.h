#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "stackelq/closedloop.h"
#include "stackelq/openloop.h"
#include "stackelq/oracle.h"
#include "stackelq/riccati.h"

namespace stackelq {

// %.17g, round-trip exact.
std::string FormatDouble(double v);

// t,K_0_0,K_0_1,...  (row-major)
void WriteRiccatiCsv(std::ostream& out, const RiccatiSolution& sol);

// path,t,x_1..x_n,y_1..y_n,p1_1..p1_n,p2_1..p2_n,u_1..u_m1,v_1..v_m2
void WriteTrajectoriesCsv(std::ostream& out, const TrajectoryEnsemble& ens,
                          const GameSpec& spec);

// t,xi,eta,zeta,bang
void WriteProfileCsv(std::ostream& out, const ClosedLoopProfile& profile);

// N,J1_disc,J1_cont,abs_err,order
void WriteConvergenceCsv(std::ostream& out,
                         const std::vector<ConvergenceRow>& rows);

}  // namespace stackelq
