#include "stackelq/config.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "stackelq/errors.h"

namespace stackelq {
namespace {

using nlohmann::json;

std::string Trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

[[noreturn]] void Fail(const std::string& key, const std::string& detail) {
  throw SolverError(ErrorCode::kConfig, key, 0.0, key + ": " + detail);
}

double Number(const json& v, const std::string& key) {
  if (!v.is_number()) Fail(key, "expected a number");
  return v.get<double>();
}

MatrixXd Matrix(const json& v, const std::string& key) {
  if (v.is_number()) return MatrixXd::Constant(1, 1, v.get<double>());
  if (!v.is_array() || v.empty()) Fail(key, "expected a matrix");
  // A flat array is a single row.
  if (!v[0].is_array()) {
    MatrixXd m(1, v.size());
    for (std::size_t j = 0; j < v.size(); ++j) m(0, j) = Number(v[j], key);
    return m;
  }
  const std::size_t cols = v[0].size();
  MatrixXd m(v.size(), cols);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_array() || v[i].size() != cols) Fail(key, "ragged matrix");
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = Number(v[i][j], key);
  }
  return m;
}

VectorXd Vector(const json& v, const std::string& key) {
  const MatrixXd m = Matrix(v, key);
  if (m.rows() != 1 && m.cols() != 1) Fail(key, "expected a vector");
  return m.reshaped();
}

long Integer(const json& v, const std::string& key) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) {
    Fail(key, "expected an integer");
  }
  return v.get<long>();
}

}  // namespace

RunConfig ParseConfig(const std::string& text) {
  std::map<std::string, json> entries;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      Fail("line " + std::to_string(line_no), "expected key = value");
    }
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));
    json parsed = json::parse(value, nullptr, false);
    if (parsed.is_discarded()) Fail(key, "unparsable value " + value);
    entries[key] = std::move(parsed);
  }

  RunConfig config;
  auto take = [&](const std::string& key) -> const json* {
    auto it = entries.find(key);
    return it == entries.end() ? nullptr : &it->second;
  };
  auto require = [&](const std::string& key) -> const json& {
    const json* v = take(key);
    if (!v) Fail(key, "missing");
    return *v;
  };

  GameSpec& g = config.game;
  g.A = Matrix(require("game.A"), "game.A");
  g.B1 = Matrix(require("game.B1"), "game.B1");
  g.B2 = Matrix(require("game.B2"), "game.B2");
  g.C = Matrix(require("game.C"), "game.C");
  g.Q1 = Matrix(require("game.Q1"), "game.Q1");
  g.Q2 = Matrix(require("game.Q2"), "game.Q2");
  g.R1 = Matrix(require("game.R1"), "game.R1");
  g.R2 = Matrix(require("game.R2"), "game.R2");
  g.G1 = Matrix(require("game.G1"), "game.G1");
  g.G2 = Matrix(require("game.G2"), "game.G2");
  g.T = Number(require("game.T"), "game.T");
  g.x0 = Vector(require("game.x0"), "game.x0");

  if (const json* v = take("grid.N")) config.grid_n = Integer(*v, "grid.N");
  if (const json* v = take("mc.paths")) {
    config.mc_paths = Integer(*v, "mc.paths");
  }
  if (const json* v = take("mc.seed")) {
    if (!v->is_number_unsigned()) Fail("mc.seed", "expected an unsigned integer");
    config.seed = v->get<std::uint64_t>();
  }
  if (const json* v = take("mc.workers")) {
    config.workers = Integer(*v, "mc.workers");
  }
  if (const json* v = take("closed_loop.bound")) {
    config.closed_loop_bound = Number(*v, "closed_loop.bound");
  }
  if (const json* v = take("closed_loop.max_iterations")) {
    config.closed_loop_max_iterations =
        Integer(*v, "closed_loop.max_iterations");
  }
  if (const json* v = take("oracle.N")) {
    if (!v->is_array()) Fail("oracle.N", "expected a list");
    config.oracle_n.clear();
    for (const json& n : *v) config.oracle_n.push_back(Integer(n, "oracle.N"));
  }
  if (const json* v = take("tol.riccati_residual")) {
    config.tol.riccati_residual = Number(*v, "tol.riccati_residual");
  }
  if (const json* v = take("tol.stationarity")) {
    config.tol.stationarity = Number(*v, "tol.stationarity");
  }
  if (const json* v = take("tol.convexity")) {
    config.tol.convexity = Number(*v, "tol.convexity");
  }
  if (const json* v = take("tol.oracle_gap")) {
    config.tol.oracle_gap = Number(*v, "tol.oracle_gap");
  }
  if (const json* v = take("output.dir")) {
    if (!v->is_string()) Fail("output.dir", "expected a string");
    config.output_dir = v->get<std::string>();
  }

  static const char* kKnown[] = {
      "game.A", "game.B1", "game.B2", "game.C", "game.Q1", "game.Q2",
      "game.R1", "game.R2", "game.G1", "game.G2", "game.T", "game.x0",
      "grid.N", "mc.paths", "mc.seed", "mc.workers", "closed_loop.bound",
      "closed_loop.max_iterations", "oracle.N", "tol.riccati_residual", "tol.stationarity", "tol.convexity",
      "tol.oracle_gap", "output.dir"};
  for (const auto& [key, value] : entries) {
    if (std::find(std::begin(kKnown), std::end(kKnown), key) ==
        std::end(kKnown)) {
      Fail(key, "unknown key");
    }
  }
  return config;
}

RunConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail("config", "cannot read " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return ParseConfig(text.str());
}

ProfileOptions ProfileOptionsFor(const RunConfig& config) {
  ProfileOptions options;
  options.max_iterations = config.closed_loop_max_iterations;
  return options;
}

void CheckRunConfig(const RunConfig& config) {
  if (config.grid_n < 4) {
    throw SolverError(ErrorCode::kConfig, "grid.N", config.grid_n,
                      "grid.N must be at least 4");
  }
  if (config.mc_paths < 1) {
    throw SolverError(ErrorCode::kConfig, "mc.paths", config.mc_paths,
                      "mc.paths must be at least 1");
  }
  if (config.workers < 1) {
    throw SolverError(ErrorCode::kConfig, "mc.workers", config.workers,
                      "mc.workers must be at least 1");
  }
  if (!(config.closed_loop_bound >= 0.0)) {
    throw SolverError(ErrorCode::kConfig, "closed_loop.bound",
                      config.closed_loop_bound,
                      "closed_loop.bound must be nonnegative");
  }
  if (config.closed_loop_max_iterations < 1) {
    throw SolverError(ErrorCode::kConfig, "closed_loop.max_iterations",
                      config.closed_loop_max_iterations,
                      "closed_loop.max_iterations must be at least 1");
  }
  for (std::size_t i = 0; i < config.oracle_n.size(); ++i) {
    if (config.oracle_n[i] < 1 ||
        (i > 0 && config.oracle_n[i] <= config.oracle_n[i - 1])) {
      throw SolverError(ErrorCode::kConfig, "oracle.N", config.oracle_n[i],
                        "oracle.N must be ascending positive integers");
    }
  }
}

}  // namespace stackelq
