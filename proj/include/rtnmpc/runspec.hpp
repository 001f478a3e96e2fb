/*
 Copyright 2026 The rtnmpc Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtnmpc/benchmarks.hpp"
#include "rtnmpc/simharness.hpp"
#include "rtnmpc/sqp.hpp"

namespace rtnmpc {

inline constexpr int kRunSpecSchema = 1;

/// Benchmark choice plus the full option set of one run.
struct RunSpec {
  std::string benchmark = "pendulum";
  BenchmarkOptions bench;
  std::vector<double> stage_weights;     // diagonal override, empty keeps the benchmark weights
  std::vector<double> terminal_weights;
  SolverOptions solver;
  SimConfig sim;
  bool plant_uses_controller_scheme = false;
  std::string output_dir = "rtnmpc_out";
  int threads = 0;  // 0: hardware concurrency

  /// solver with the thread count resolved.
  SolverOptions solver_options() const;

  /// Option values in the supported set and a consistent condensing/QP pairing.
  void validate() const;
  nlohmann::json to_json() const;
};

/// Parses a schema-versioned JSON spec. Unknown sections or keys throw ConfigError.
RunSpec parse_run_spec(const nlohmann::json &j);
RunSpec load_run_spec(const std::string &path);

/// Explicit condensing/QP-path choices after merging file and flags; an
/// unset partner follows the other (dense <-> full, sparse <-> none).
void resolve_qp_pairing(RunSpec &spec, std::optional<CondensingMode> condensing, std::optional<QpPath> path);

/// The benchmark with the spec's weight overrides applied.
Benchmark build_benchmark(const RunSpec &spec);

} // namespace rtnmpc
