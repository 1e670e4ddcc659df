// Batch front end: stackelq <command> --config PATH [--out DIR] [--seed S]
// [--paths N] [--grid N].
//
// Exit codes: 0 success, 1 verification failure, 2 input error, 3 solver
// failure (non-convergence, blow-up).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "stackelq/augment.h"
#include "stackelq/closedloop.h"
#include "stackelq/config.h"
#include "stackelq/errors.h"
#include "stackelq/openloop.h"
#include "stackelq/oracle.h"
#include "stackelq/output.h"
#include "stackelq/riccati.h"
#include "stackelq/verify.h"

namespace fs = std::filesystem;
using namespace stackelq;

namespace {

constexpr int kOk = 0;
constexpr int kVerifyFailed = 1;
constexpr int kInputError = 2;
constexpr int kSolverError = 3;

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kBlowUp:
    case ErrorCode::kNoConvergence:
    case ErrorCode::kMaxIterations:
    case ErrorCode::kFollowerIterationDiverged:
    case ErrorCode::kSymmetrizationFailed:
    case ErrorCode::kSingularKkt:
      return kSolverError;
    default:
      return kInputError;
  }
}

struct Overrides {
  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> paths;
  std::optional<int> grid;
};

RunConfig Load(const Overrides& o) {
  RunConfig c = LoadConfig(o.config_path);
  if (o.out) c.output_dir = *o.out;
  if (o.seed) c.seed = *o.seed;
  if (o.paths) c.mc_paths = *o.paths;
  if (o.grid) c.grid_n = *o.grid;
  CheckRunConfig(c);
  c.game = ValidateSpec(c.game);
  return c;
}

std::ofstream Open(const RunConfig& c, const std::string& name) {
  fs::create_directories(c.output_dir);
  const fs::path path = fs::path(c.output_dir) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw SolverError(ErrorCode::kConfig, "output.dir", 0.0,
                      "cannot write " + path.string());
  }
  return out;
}

void KeyValue(std::ostream& out, const char* key, double v) {
  out << key << " = " << FormatDouble(v) << '\n';
}

int SolveOpen(const RunConfig& c) {
  const TimeGrid grid(c.game.T, c.grid_n);
  const RiccatiSystem system = HatRiccatiSystem(AssembleHat(c.game));
  const RiccatiSolution sol = SolveRiccati(system, grid);
  const FeedbackLaw law = Synthesize(sol, c.game);
  const MomentCosts moment = CostsMoment(sol, c.game, grid);
  const TrajectoryEnsemble ens =
      Simulate(law, c.game, grid, c.mc_paths, c.seed, c.workers);
  const CostEstimate mc = CostsMc(ens, c.game, c.workers);

  std::ofstream riccati = Open(c, "riccati.csv");
  WriteRiccatiCsv(riccati, sol);
  std::ofstream costs = Open(c, "costs.txt");
  costs << "N = " << c.grid_n << "\npaths = " << c.mc_paths
        << "\nseed = " << c.seed << '\n';
  KeyValue(costs, "J1_moment", moment.J1);
  KeyValue(costs, "J2_moment", moment.J2);
  KeyValue(costs, "J1_mc", mc.J1);
  KeyValue(costs, "J2_mc", mc.J2);
  KeyValue(costs, "se1", mc.se1);
  KeyValue(costs, "se2", mc.se2);
  KeyValue(costs, "riccati_residual", RiccatiResidual(sol, system));
  std::printf("J1 = %.17g\nJ2 = %.17g\n", moment.J1, moment.J2);
  return kOk;
}

int SolveClosed(const RunConfig& c) {
  const TimeGrid grid(c.game.T, c.grid_n);
  const ClosedLoopProfile profile =
      SolveProfile(c.game, grid, c.closed_loop_bound, ProfileOptionsFor(c));
  const ClosedLoopLaw law = SynthesizeClosed(profile, c.game, grid);
  const MomentCosts moment = ClosedCostsMoment(profile, c.game);
  const ClosedLoopRun run =
      SimulateClosed(law, c.game, grid, c.mc_paths, c.seed, c.workers);

  std::ofstream csv = Open(c, "profile.csv");
  WriteProfileCsv(csv, profile);
  std::ofstream costs = Open(c, "closed_costs.txt");
  costs << "N = " << c.grid_n << "\npaths = " << c.mc_paths
        << "\nseed = " << c.seed << '\n';
  KeyValue(costs, "bound", c.closed_loop_bound);
  KeyValue(costs, "J1_moment", moment.J1);
  KeyValue(costs, "J2_moment", moment.J2);
  KeyValue(costs, "J1_mc", run.costs.J1);
  KeyValue(costs, "J2_mc", run.costs.J2);
  KeyValue(costs, "se1", run.costs.se1);
  KeyValue(costs, "se2", run.costs.se2);
  costs << "iterations = " << profile.iterations << '\n';
  std::printf("J1 = %.17g\nJ2 = %.17g\n", moment.J1, moment.J2);
  return kOk;
}

int SimulateCmd(const RunConfig& c) {
  const TimeGrid grid(c.game.T, c.grid_n);
  const RiccatiSolution sol =
      SolveRiccati(HatRiccatiSystem(AssembleHat(c.game)), grid);
  const FeedbackLaw law = Synthesize(sol, c.game);
  const TrajectoryEnsemble ens =
      Simulate(law, c.game, grid, c.mc_paths, c.seed, c.workers);
  std::ofstream csv = Open(c, "trajectories.csv");
  WriteTrajectoriesCsv(csv, ens, c.game);
  return kOk;
}

int OracleCmd(const RunConfig& c) {
  const std::vector<ConvergenceRow> rows =
      ConvergenceReport(c.game, c.oracle_n, c.workers);
  std::ofstream csv = Open(c, "convergence.csv");
  WriteConvergenceCsv(csv, rows);
  WriteConvergenceCsv(std::cout, rows);
  return kOk;
}

int VerifyCmd(const RunConfig& c) {
  bool ok = true;
  for (const CheckResult& r : RunVerification(c)) {
    const char* status = r.skipped ? "SKIP" : (r.passed ? "PASS" : "FAIL");
    std::printf("%s %s", status, r.name.c_str());
    if (!r.skipped) {
      std::printf(" value=%.17g threshold=%.17g", r.value, r.threshold);
    }
    if (!r.note.empty()) std::printf(" (%s)", r.note.c_str());
    std::printf("\n");
    if (!r.passed) {
      std::fprintf(stderr, "VerificationFailed %s %.17g\n", r.name.c_str(),
                   r.value);
      ok = false;
    }
  }
  return ok ? kOk : kVerifyFailed;
}

int ReportCmd(const RunConfig& c) {
  static const char* kArtifacts[] = {"costs.txt", "closed_costs.txt",
                                     "riccati.csv", "profile.csv",
                                     "trajectories.csv", "convergence.csv"};
  std::printf("output directory: %s\n", c.output_dir.c_str());
  int found = 0;
  for (const char* name : kArtifacts) {
    const fs::path path = fs::path(c.output_dir) / name;
    std::ifstream in(path);
    if (!in) continue;
    ++found;
    std::string line;
    if (path.extension() == ".txt") {
      std::printf("\n[%s]\n", name);
      while (std::getline(in, line)) std::printf("  %s\n", line.c_str());
      continue;
    }
    std::string header, last;
    std::getline(in, header);
    long rows = 0;
    while (std::getline(in, line)) {
      ++rows;
      last = line;
    }
    std::printf("\n[%s] %ld rows\n  %s\n", name, rows, header.c_str());
    if (rows > 0) std::printf("  last: %s\n", last.c_str());
  }
  if (found == 0) std::printf("no artifacts found\n");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stackelberg equilibria of stochastic linear-quadratic games"};
  app.require_subcommand(1);
  Overrides o;
  std::string out_dir;
  std::uint64_t seed = 0;
  int paths = 0, grid = 0;

  struct Command {
    const char* name;
    const char* help;
    int (*run)(const RunConfig&);
  };
  const Command commands[] = {
      {"validate", "parse and validate the configuration",
       [](const RunConfig&) {
         std::printf("ok\n");
         return kOk;
       }},
      {"solve-open", "open-loop Riccati, synthesis and costs", SolveOpen},
      {"solve-closed", "closed-loop profile, law and costs", SolveClosed},
      {"simulate", "simulate open-loop trajectories", SimulateCmd},
      {"oracle", "discrete-time convergence study (C = 0)", OracleCmd},
      {"verify", "run the invariant suite", VerifyCmd},
      {"report", "summarize artifacts in the output directory", ReportCmd},
  };
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const Command& cmd : commands) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("--config", o.config_path, "configuration file")
        ->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "Monte Carlo seed");
    sub->add_option("--paths", paths, "Monte Carlo paths");
    sub->add_option("--grid", grid, "time steps N");
    subs.emplace_back(sub, &cmd);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  for (const auto& [sub, cmd] : subs) {
    if (!sub->parsed()) continue;
    if (sub->count("--out")) o.out = out_dir;
    if (sub->count("--seed")) o.seed = seed;
    if (sub->count("--paths")) o.paths = paths;
    if (sub->count("--grid")) o.grid = grid;
    try {
      return cmd->run(Load(o));
    } catch (const SolverError& e) {
      std::fprintf(stderr, "%s\n", e.Reason().c_str());
      return ExitCodeFor(e.code());
    } catch (const std::exception& e) {
      std::fprintf(stderr, "InternalError %s\n", e.what());
      return kSolverError;
    }
  }
  return kInputError;
}
