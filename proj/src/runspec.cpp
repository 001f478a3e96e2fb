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

#include "rtnmpc/runspec.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <set>
#include <thread>
#include <tuple>

#include "rtnmpc/errors.hpp"

namespace rtnmpc {

namespace {

using json = nlohmann::json;

void check_keys(const json &obj, const std::string &section, std::initializer_list<const char *> allowed) {
  if (!obj.is_object()) throw ConfigError("section '" + section + "' must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto &item : obj.items()) {
    if (!ok.count(item.key())) {
      throw ConfigError("unknown key '" + (section.empty() ? "" : section + ".") + item.key() + "'");
    }
  }
}

template <class T> void read(const json &obj, const char *key, const std::string &section, T &out) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception &) {
    throw ConfigError("key '" + section + "." + key + "' has the wrong type");
  }
}

std::optional<std::string> read_string(const json &obj, const char *key, const std::string &section) {
  std::string s;
  if (!obj.contains(key)) return std::nullopt;
  read(obj, key, section, s);
  return s;
}

} // namespace

void RunSpec::validate() const {
  const auto names = benchmark_names();
  if (std::find(names.begin(), names.end(), benchmark) == names.end()) {
    throw ConfigError("unknown benchmark '" + benchmark + "'");
  }
  if (bench.N < 0) throw ConfigError("problem.N must be positive");
  if (bench.Ts < 0.0) throw ConfigError("problem.Ts must be positive");
  if (bench.masses < 1) throw ConfigError("problem.masses must be at least 1");
  if (threads < 0) throw ConfigError("threads must be non-negative");
  solver_options().validate();
  sim.validate();
  if (output_dir.empty()) throw ConfigError("output.dir must not be empty");
}

json RunSpec::to_json() const {
  json j;
  j["schema_version"] = kRunSpecSchema;
  j["problem"] = {{"benchmark", benchmark}, {"N", bench.N}, {"Ts", bench.Ts}, {"masses", bench.masses}};
  j["weights"] = {{"stage", stage_weights}, {"terminal", terminal_weights}};
  j["integrator"] = {{"scheme", to_string(solver.integrator.scheme)},
                     {"steps", solver.integrator.steps_per_interval},
                     {"newton_tol", solver.integrator.newton_tol},
                     {"newton_max_iters", solver.integrator.newton_max_iters}};
  j["condensing"] = {{"mode", to_string(solver.condensing)}};
  j["qp"] = {{"path", to_string(solver.qp_path)},
             {"tol", solver.qp.tol},
             {"max_iters", solver.qp.max_iters},
             {"reg_eps", solver.qp.reg_eps}};
  j["sqp"] = {{"mode", to_string(solver.sqp.mode)},
              {"max_iters", solver.sqp.max_sqp_iters},
              {"kkt_tol", solver.sqp.kkt_tol},
              {"armijo_eta", solver.sqp.armijo_eta},
              {"backtrack_factor", solver.sqp.backtrack_factor},
              {"min_alpha", solver.sqp.min_alpha},
              {"merit_rho", solver.sqp.merit_rho},
              {"merit_sigma", solver.sqp.merit_sigma},
              {"report_kkt", solver.sqp.rti_report_kkt}};
  j["cmon"] = {{"enabled", solver.cmon.enabled},
               {"eta_pri", solver.cmon.eta_pri},
               {"eta_dual", std::isfinite(solver.cmon.eta_dual) ? json(solver.cmon.eta_dual) : json(nullptr)},
               {"eps_abs", solver.cmon.eps_abs},
               {"eps_rel", solver.cmon.eps_rel},
               {"eps_den", solver.cmon.eps_den}};
  j["sim"] = {{"t_end", sim.t_end},
              {"plant_substeps", sim.plant_substeps},
              {"noise_std", sim.noise_std},
              {"seed", sim.seed},
              {"plant_scheme", plant_uses_controller_scheme ? std::string("controller") : to_string(sim.plant_scheme)}};
  j["output"] = {{"dir", output_dir}};
  j["threads"] = threads;
  return j;
}

SolverOptions RunSpec::solver_options() const {
  SolverOptions o = solver;
  o.threads = threads > 0 ? threads : std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
  return o;
}

void resolve_qp_pairing(RunSpec &spec, std::optional<CondensingMode> condensing, std::optional<QpPath> path) {
  if (condensing) spec.solver.condensing = *condensing;
  if (path) spec.solver.qp_path = *path;
  if (path && !condensing) {
    spec.solver.condensing = *path == QpPath::Dense ? CondensingMode::Full : CondensingMode::None;
  }
  if (condensing && !path) {
    spec.solver.qp_path = *condensing == CondensingMode::Full ? QpPath::Dense : QpPath::Sparse;
  }
}

RunSpec parse_run_spec(const json &j) {
  check_keys(j, "", {"schema_version", "problem", "weights", "integrator", "condensing", "qp", "sqp", "cmon", "sim",
                     "output", "threads"});
  if (!j.contains("schema_version")) throw ConfigError("spec is missing schema_version");
  int version = 0;
  read(j, "schema_version", "", version);
  if (version != kRunSpecSchema) {
    throw ConfigError("unsupported schema_version " + std::to_string(version) + " (expected " +
                      std::to_string(kRunSpecSchema) + ")");
  }
  RunSpec spec;
  std::optional<CondensingMode> condensing;
  std::optional<QpPath> path;

  if (j.contains("problem")) {
    const json &s = j["problem"];
    check_keys(s, "problem", {"benchmark", "N", "Ts", "masses"});
    read(s, "benchmark", "problem", spec.benchmark);
    read(s, "N", "problem", spec.bench.N);
    read(s, "Ts", "problem", spec.bench.Ts);
    read(s, "masses", "problem", spec.bench.masses);
  }
  if (j.contains("weights")) {
    const json &s = j["weights"];
    check_keys(s, "weights", {"stage", "terminal"});
    read(s, "stage", "weights", spec.stage_weights);
    read(s, "terminal", "weights", spec.terminal_weights);
  }
  if (j.contains("integrator")) {
    const json &s = j["integrator"];
    check_keys(s, "integrator", {"scheme", "steps", "newton_tol", "newton_max_iters"});
    if (auto v = read_string(s, "scheme", "integrator")) spec.solver.integrator.scheme = parse_scheme(*v);
    read(s, "steps", "integrator", spec.solver.integrator.steps_per_interval);
    read(s, "newton_tol", "integrator", spec.solver.integrator.newton_tol);
    read(s, "newton_max_iters", "integrator", spec.solver.integrator.newton_max_iters);
  }
  if (j.contains("condensing")) {
    const json &s = j["condensing"];
    check_keys(s, "condensing", {"mode"});
    if (auto v = read_string(s, "mode", "condensing")) condensing = parse_condensing_mode(*v);
  }
  if (j.contains("qp")) {
    const json &s = j["qp"];
    check_keys(s, "qp", {"path", "tol", "max_iters", "reg_eps"});
    if (auto v = read_string(s, "path", "qp")) path = parse_qp_path(*v);
    read(s, "tol", "qp", spec.solver.qp.tol);
    read(s, "max_iters", "qp", spec.solver.qp.max_iters);
    read(s, "reg_eps", "qp", spec.solver.qp.reg_eps);
  }
  if (j.contains("sqp")) {
    const json &s = j["sqp"];
    check_keys(s, "sqp", {"mode", "max_iters", "kkt_tol", "armijo_eta", "backtrack_factor", "min_alpha", "merit_rho",
                          "merit_sigma", "report_kkt"});
    if (auto v = read_string(s, "mode", "sqp")) spec.solver.sqp.mode = parse_sqp_mode(*v);
    read(s, "max_iters", "sqp", spec.solver.sqp.max_sqp_iters);
    read(s, "kkt_tol", "sqp", spec.solver.sqp.kkt_tol);
    read(s, "armijo_eta", "sqp", spec.solver.sqp.armijo_eta);
    read(s, "backtrack_factor", "sqp", spec.solver.sqp.backtrack_factor);
    read(s, "min_alpha", "sqp", spec.solver.sqp.min_alpha);
    read(s, "merit_rho", "sqp", spec.solver.sqp.merit_rho);
    read(s, "merit_sigma", "sqp", spec.solver.sqp.merit_sigma);
    read(s, "report_kkt", "sqp", spec.solver.sqp.rti_report_kkt);
  }
  if (j.contains("cmon")) {
    const json &s = j["cmon"];
    check_keys(s, "cmon", {"enabled", "eta_pri", "eta_dual", "eps_abs", "eps_rel", "eps_den"});
    CmonConfig &c = spec.solver.cmon;
    read(s, "enabled", "cmon", c.enabled);
    read(s, "eps_abs", "cmon", c.eps_abs);
    read(s, "eps_rel", "cmon", c.eps_rel);
    if (s.contains("eps_rel") && !s.contains("eta_pri") && !s.contains("eta_dual")) {
      std::tie(c.eta_pri, c.eta_dual) = cmon_thresholds_from_tolerances(c.eps_abs, c.eps_rel);
    }
    read(s, "eta_pri", "cmon", c.eta_pri);
    if (s.contains("eta_dual")) {
      if (s["eta_dual"].is_null()) {
        c.eta_dual = std::numeric_limits<double>::infinity();
      } else {
        read(s, "eta_dual", "cmon", c.eta_dual);
      }
    }
    read(s, "eps_den", "cmon", c.eps_den);
  }
  if (j.contains("sim")) {
    const json &s = j["sim"];
    check_keys(s, "sim", {"t_end", "plant_substeps", "noise_std", "seed", "plant_scheme"});
    read(s, "t_end", "sim", spec.sim.t_end);
    read(s, "plant_substeps", "sim", spec.sim.plant_substeps);
    read(s, "noise_std", "sim", spec.sim.noise_std);
    read(s, "seed", "sim", spec.sim.seed);
    if (auto v = read_string(s, "plant_scheme", "sim")) {
      spec.plant_uses_controller_scheme = *v == "controller";
      if (!spec.plant_uses_controller_scheme) spec.sim.plant_scheme = parse_scheme(*v);
    }
  }
  if (j.contains("output")) {
    const json &s = j["output"];
    check_keys(s, "output", {"dir"});
    read(s, "dir", "output", spec.output_dir);
  }
  read(j, "threads", "", spec.threads);
  resolve_qp_pairing(spec, condensing, path);
  return spec;
}

RunSpec load_run_spec(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open spec file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error &e) {
    throw ConfigError("spec file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_run_spec(j);
}

Benchmark build_benchmark(const RunSpec &spec) {
  Benchmark b = make_benchmark(spec.benchmark, spec.bench);
  OcpProblem &pb = b.problem;
  if (!spec.stage_weights.empty()) {
    if (static_cast<int>(spec.stage_weights.size()) != pb.dims.nr) {
      throw ConfigError("weights.stage needs " + std::to_string(pb.dims.nr) + " entries");
    }
    pb.W = Eigen::Map<const Vec>(spec.stage_weights.data(), pb.dims.nr).asDiagonal();
  }
  if (!spec.terminal_weights.empty()) {
    if (static_cast<int>(spec.terminal_weights.size()) != pb.dims.nrN) {
      throw ConfigError("weights.terminal needs " + std::to_string(pb.dims.nrN) + " entries");
    }
    pb.WN = Eigen::Map<const Vec>(spec.terminal_weights.data(), pb.dims.nrN).asDiagonal();
  }
  pb.validate();
  return b;
}

} // namespace rtnmpc
