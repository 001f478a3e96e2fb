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

#include "rtnmpc/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "rtnmpc/errors.hpp"

namespace rtnmpc {

namespace {

namespace fs = std::filesystem;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

fs::path prepare_output(const RunSpec &spec) {
  fs::path dir(spec.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + spec.output_dir + "': " + ec.message());
  return dir;
}

SimConfig sim_config(const RunSpec &spec) {
  SimConfig sim = spec.sim;
  if (spec.plant_uses_controller_scheme) sim.plant_scheme = spec.solver.integrator.scheme;
  return sim;
}

SimLog simulate(const RunSpec &spec) {
  const Benchmark bench = build_benchmark(spec);
  const SimConfig sim = sim_config(spec);
  const auto refs = reference_series(bench, sim.samples(bench.problem.dims.Ts));
  const SolverOptions options = spec.solver_options();
  const Trajectory warm = Trajectory::constant(bench.problem.dims, bench.x_init, bench.u_init);
  return run_closed_loop(bench.problem, options, sim, bench.x_init, refs, warm);
}

double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct PhaseSeries {
  const char *name;
  double (*pick)(const PhaseTimings &);
};

constexpr PhaseSeries kPhases[] = {
    {"solve", [](const PhaseTimings &t) { return t.solve(); }},
    {"generation", [](const PhaseTimings &t) { return t.generation; }},
    {"condensing", [](const PhaseTimings &t) { return t.condensing; }},
    {"qp", [](const PhaseTimings &t) { return t.qp; }},
    {"line_search", [](const PhaseTimings &t) { return t.line_search; }},
    {"solution_info", [](const PhaseTimings &t) { return t.solution_info; }},
};

struct Overrides {
  std::string spec_file;
  std::string benchmark, mode, scheme, condensing, qp_path, out_dir, plant_scheme;
  int steps = 0, max_iters = 0, N = 0, masses = 0, threads = 0, plant_substeps = 0;
  double eta_pri = 0, eta_dual = 0, kkt_tol = 0, t_end = 0, noise = 0, Ts = 0;
  std::uint64_t seed = 0;
  bool cmon = false, no_cmon = false;
  std::vector<CLI::Option *> opts;
  CLI::Option *o_benchmark{}, *o_mode{}, *o_scheme{}, *o_condensing{}, *o_qp_path{}, *o_out{}, *o_steps{},
      *o_max_iters{}, *o_N{}, *o_masses{}, *o_threads{}, *o_eta_pri{}, *o_eta_dual{}, *o_kkt_tol{}, *o_t_end{},
      *o_noise{}, *o_seed{}, *o_Ts{}, *o_plant_substeps{}, *o_plant_scheme{};
};

void add_overrides(CLI::App *app, Overrides &o) {
  app->add_option("--spec", o.spec_file, "JSON run specification")->check(CLI::ExistingFile);
  o.o_benchmark = app->add_option("--benchmark,-b", o.benchmark, "benchmark name");
  o.o_mode = app->add_option("--mode", o.mode, "sqp mode: converge | rti");
  o.o_scheme = app->add_option("--scheme", o.scheme, "integrator: erk4 | irk-gl2 | irk-gl3");
  o.o_steps = app->add_option("--steps", o.steps, "integrator steps per shooting interval");
  o.o_condensing = app->add_option("--condensing", o.condensing, "none | full");
  o.o_qp_path = app->add_option("--qp-path", o.qp_path, "dense | sparse");
  o.o_max_iters = app->add_option("--max-iters", o.max_iters, "SQP iteration limit");
  o.o_kkt_tol = app->add_option("--kkt-tol", o.kkt_tol, "SQP KKT tolerance");
  app->add_flag("--cmon", o.cmon, "enable sensitivity reuse");
  app->add_flag("--no-cmon", o.no_cmon, "disable sensitivity reuse");
  o.o_eta_pri = app->add_option("--eta-pri", o.eta_pri, "primal reuse threshold");
  o.o_eta_dual = app->add_option("--eta-dual", o.eta_dual, "dual reuse threshold");
  o.o_N = app->add_option("--N", o.N, "shooting intervals");
  o.o_Ts = app->add_option("--Ts", o.Ts, "sample time");
  o.o_masses = app->add_option("--masses", o.masses, "free masses (chain benchmarks)");
  o.o_t_end = app->add_option("--t-end", o.t_end, "simulated time");
  o.o_noise = app->add_option("--noise", o.noise, "measurement noise standard deviation");
  o.o_seed = app->add_option("--seed", o.seed, "random seed");
  o.o_plant_substeps = app->add_option("--plant-substeps", o.plant_substeps, "plant integration refinement");
  o.o_plant_scheme = app->add_option("--plant-scheme", o.plant_scheme, "plant integrator or 'controller'");
  o.o_out = app->add_option("--out,-o", o.out_dir, "output directory");
  o.o_threads = app->add_option("--threads", o.threads, "worker threads (0: hardware)");
}

RunSpec resolve_spec(const Overrides &o) {
  RunSpec spec = o.spec_file.empty() ? RunSpec{} : load_run_spec(o.spec_file);
  if (o.o_benchmark->count()) spec.benchmark = o.benchmark;
  if (o.o_mode->count()) spec.solver.sqp.mode = parse_sqp_mode(o.mode);
  if (o.o_scheme->count()) spec.solver.integrator.scheme = parse_scheme(o.scheme);
  if (o.o_steps->count()) spec.solver.integrator.steps_per_interval = o.steps;
  std::optional<CondensingMode> cond;
  std::optional<QpPath> path;
  if (o.o_condensing->count()) cond = parse_condensing_mode(o.condensing);
  if (o.o_qp_path->count()) path = parse_qp_path(o.qp_path);
  resolve_qp_pairing(spec, cond, path);
  if (o.o_max_iters->count()) spec.solver.sqp.max_sqp_iters = o.max_iters;
  if (o.o_kkt_tol->count()) spec.solver.sqp.kkt_tol = o.kkt_tol;
  if (o.cmon && o.no_cmon) throw ConfigError("--cmon and --no-cmon are mutually exclusive");
  if (o.cmon) spec.solver.cmon.enabled = true;
  if (o.no_cmon) spec.solver.cmon.enabled = false;
  if (o.o_eta_pri->count()) spec.solver.cmon.eta_pri = o.eta_pri;
  if (o.o_eta_dual->count()) spec.solver.cmon.eta_dual = o.eta_dual;
  if (o.o_N->count()) spec.bench.N = o.N;
  if (o.o_Ts->count()) spec.bench.Ts = o.Ts;
  if (o.o_masses->count()) spec.bench.masses = o.masses;
  if (o.o_t_end->count()) spec.sim.t_end = o.t_end;
  if (o.o_noise->count()) spec.sim.noise_std = o.noise;
  if (o.o_seed->count()) spec.sim.seed = o.seed;
  if (o.o_plant_substeps->count()) spec.sim.plant_substeps = o.plant_substeps;
  if (o.o_plant_scheme->count()) {
    spec.plant_uses_controller_scheme = o.plant_scheme == "controller";
    if (!spec.plant_uses_controller_scheme) spec.sim.plant_scheme = parse_scheme(o.plant_scheme);
  }
  if (o.o_out->count()) spec.output_dir = o.out_dir;
  if (o.o_threads->count()) spec.threads = o.threads;
  spec.validate();
  return spec;
}

} // namespace

int cmd_run(const RunSpec &spec, std::ostream &out, std::ostream &err) {
  spec.validate();
  const fs::path dir = prepare_output(spec);
  const SimLog log = simulate(spec);
  {
    std::ofstream f(dir / "sim.csv");
    log.write_csv(f);
  }
  {
    std::ofstream f(dir / "solver.csv");
    log.write_solver_csv(f);
  }
  nlohmann::json summary = log.summary();
  summary["spec"] = spec.to_json();
  {
    std::ofstream f(dir / "summary.json");
    f << summary.dump(2) << '\n';
  }
  out << "benchmark " << spec.benchmark << ": " << log.samples.size() << " samples, " << log.failures()
      << " solver failures\n";
  out << "solve time mean " << num(summary["solve_time"]["mean"].get<double>()) << " s, max "
      << num(summary["solve_time"]["max"].get<double>()) << " s\n";
  out << "outputs written to " << dir.string() << '\n';
  if (log.failures() > 0) {
    err << "solver failed on " << log.failures() << " samples (previous input held)\n";
    return kExitSolverFailure;
  }
  return kExitOk;
}

int cmd_check(const RunSpec &spec, std::ostream &out, std::ostream &err) {
  spec.validate();
  const Benchmark bench = build_benchmark(spec);
  SolverOptions options = spec.solver_options();
  options.sqp.mode = SqpMode::Converge;
  const Trajectory traj0 = Trajectory::constant(bench.problem.dims, bench.x_init, bench.u_init);
  const SolveResult res = sqp_solve(bench.problem, options, traj0, bench.x_init, bench.reference(0.0));
  const SolveReport &r = res.report;
  out << "status " << to_string(r.status) << ", iterations " << r.iters << '\n';
  if (r.kkt_available) {
    out << "kkt stationarity " << num(r.kkt.stationarity) << ", eq_violation " << num(r.kkt.eq_violation)
        << ", ineq_violation " << num(r.kkt.ineq_violation) << '\n';
  }
  if (!r.message.empty()) err << r.message << '\n';
  const bool ok = r.kkt_available && r.kkt.max() <= options.sqp.kkt_tol;
  if (!ok) err << "KKT tolerance " << num(options.sqp.kkt_tol) << " not reached\n";
  return ok ? kExitOk : kExitSolverFailure;
}

int cmd_bench(const RunSpec &spec, int repeats, const std::string &pair, std::ostream &out, std::ostream &err) {
  if (repeats < 1) throw ConfigError("--repeats must be at least 1");
  spec.validate();
  std::vector<std::pair<std::string, RunSpec>> variants;
  if (pair.empty()) {
    variants.emplace_back("base", spec);
  } else if (pair == "qp.path") {
    RunSpec a = spec, b = spec;
    resolve_qp_pairing(a, std::nullopt, QpPath::Dense);
    resolve_qp_pairing(b, std::nullopt, QpPath::Sparse);
    variants.emplace_back("dense", a);
    variants.emplace_back("sparse", b);
  } else if (pair == "cmon") {
    RunSpec a = spec, b = spec;
    a.solver.cmon.enabled = false;
    b.solver.cmon.enabled = true;
    variants.emplace_back("cmon_off", a);
    variants.emplace_back("cmon_on", b);
  } else {
    throw ConfigError("unknown --pair '" + pair + "' (expected qp.path or cmon)");
  }

  std::ostringstream csv;
  csv << "variant,repeats,samples,failures";
  for (const auto &ph : kPhases) csv << ',' << ph.name << "_mean," << ph.name << "_max," << ph.name << "_p50," << ph.name << "_p90";
  csv << ",final_kkt,tracking_error_mean,update_fraction_mean\n";
  int status = kExitOk;
  for (const auto &[name, vspec] : variants) {
    std::vector<std::vector<double>> totals(std::size(kPhases));
    SimLog last;
    for (int r = 0; r < repeats; ++r) {
      last = simulate(vspec);
      for (std::size_t p = 0; p < std::size(kPhases); ++p) {
        double total = 0.0;
        for (const auto &s : last.samples) total += kPhases[p].pick(s.timings);
        totals[p].push_back(total);
      }
    }
    if (last.failures() > 0) status = kExitSolverFailure;
    const nlohmann::json summary = last.summary();
    csv << name << ',' << repeats << ',' << last.samples.size() << ',' << last.failures();
    for (const auto &t : totals) {
      double mean = 0.0;
      for (double v : t) mean += v;
      mean /= static_cast<double>(t.size());
      csv << ',' << num(mean) << ',' << num(*std::max_element(t.begin(), t.end())) << ',' << num(percentile(t, 0.5))
          << ',' << num(percentile(t, 0.9));
    }
    const auto &back = last.samples.back();
    csv << ',' << (back.kkt_available ? num(back.kkt.max()) : std::string()) << ','
        << num(summary["tracking_error"]["mean"].get<double>()) << ','
        << num(summary["cmon_update_fraction"]["mean"].get<double>()) << '\n';
  }
  const fs::path dir = prepare_output(spec);
  std::ofstream(dir / "bench.csv") << csv.str();
  out << csv.str();
  if (status != kExitOk) err << "solver failures occurred during the benchmark\n";
  return status;
}

int cmd_list_benchmarks(std::ostream &out) {
  for (const auto &name : benchmark_names()) {
    const Benchmark b = make_benchmark(name);
    const Dims &d = b.problem.dims;
    out << name << "  nx=" << d.nx << " nu=" << d.nu << " N=" << d.N << " Ts=" << d.Ts << "  " << b.description
        << '\n';
  }
  return kExitOk;
}

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"rtnmpc: nonlinear MPC by multiple shooting and Gauss-Newton SQP"};
  app.require_subcommand(1);
  Overrides run_o, check_o, bench_o;
  CLI::App *run = app.add_subcommand("run", "closed-loop simulation");
  add_overrides(run, run_o);
  CLI::App *check = app.add_subcommand("check", "open-loop solve to the KKT tolerance");
  add_overrides(check, check_o);
  CLI::App *bench = app.add_subcommand("bench", "repeated closed-loop timing");
  add_overrides(bench, bench_o);
  int repeats = 5;
  std::string pair;
  bench->add_option("--repeats", repeats, "number of repetitions");
  bench->add_option("--pair", pair, "paired variant: qp.path | cmon");
  app.add_subcommand("list-benchmarks", "registered benchmarks");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError &e) {
    err << e.what() << '\n';
    return kExitInvalidInput;
  }

  try {
    if (run->parsed()) return cmd_run(resolve_spec(run_o), out, err);
    if (check->parsed()) return cmd_check(resolve_spec(check_o), out, err);
    if (bench->parsed()) return cmd_bench(resolve_spec(bench_o), repeats, pair, out, err);
    return cmd_list_benchmarks(out);
  } catch (const ConfigError &e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitInvalidInput;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kExitSolverFailure;
  }
}

} // namespace rtnmpc
