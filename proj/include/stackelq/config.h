#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stackelq/closedloop.h"
#include "stackelq/core.h"

namespace stackelq {

struct Tolerances {
  double riccati_residual = 1e-5;
  double stationarity = 5e-3;
  double convexity = 1e-8;
  double oracle_gap = 5e-3;
};

// Batch configuration. Text format: one `dotted.key = value` per line, `#`
// starts a comment, values are JSON (numbers or row-major nested arrays; a
// bare number stands for a 1x1 matrix).
//
//   game.A  game.B1 game.B2 game.C  game.Q1 game.Q2 game.R1 game.R2
//   game.G1 game.G2 game.T  game.x0                      (all required)
//   grid.N = 1000   mc.paths = 1000   mc.seed = 0   mc.workers = 1
//   closed_loop.bound = 1.0   closed_loop.max_iterations = 1000
//   oracle.N = [250, 500, 1000, 2000]
//   tol.riccati_residual  tol.stationarity  tol.convexity  tol.oracle_gap
//   output.dir = "."
struct RunConfig {
  GameSpec game;
  int grid_n = 1000;
  int mc_paths = 1000;
  std::uint64_t seed = 0;
  int workers = 1;
  double closed_loop_bound = 1.0;
  int closed_loop_max_iterations = 1000;
  std::vector<int> oracle_n{250, 500, 1000, 2000};
  Tolerances tol;
  std::string output_dir = ".";
};

// Throws SolverError(kConfig) naming the offending key. The game block is
// parsed but not validated; call ValidateSpec on it.
RunConfig ParseConfig(const std::string& text);
RunConfig LoadConfig(const std::string& path);

// Closed-loop solver options carried by the configuration.
ProfileOptions ProfileOptionsFor(const RunConfig& config);

// Range checks on the run parameters (N >= 4, paths >= 1, ...).
void CheckRunConfig(const RunConfig& config);

}  // namespace stackelq
