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

#include <ostream>
#include <string>
#include <vector>

#include "rtnmpc/runspec.hpp"

namespace rtnmpc {

enum ExitCode : int { kExitOk = 0, kExitSolverFailure = 1, kExitInvalidInput = 2 };

/// Closed-loop run; writes sim.csv, solver.csv and summary.json to spec.output_dir.
int cmd_run(const RunSpec &spec, std::ostream &out, std::ostream &err);

/// Open-loop SQP to convergence from a cold start; prints the KKT triple.
int cmd_check(const RunSpec &spec, std::ostream &out, std::ostream &err);

/// Repeated closed-loop runs. `pair` is "", "qp.path" or "cmon" and adds the
/// paired variant. Writes bench.csv to spec.output_dir and echoes it.
int cmd_bench(const RunSpec &spec, int repeats, const std::string &pair, std::ostream &out, std::ostream &err);

int cmd_list_benchmarks(std::ostream &out);

/// Full command line front end. Never throws.
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace rtnmpc
