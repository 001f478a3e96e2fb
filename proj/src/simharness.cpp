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

#include "rtnmpc/simharness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include "rtnmpc/errors.hpp"

namespace rtnmpc {

namespace {

std::size_t idx(int k) { return static_cast<std::size_t>(k); }

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void put_vec(std::ostream &os, const Vec &v) {
  for (int i = 0; i < v.size(); ++i) os << ',' << num(v[i]);
}

void put_header(std::ostream &os, const char *prefix, int n) {
  for (int i = 0; i < n; ++i) os << ',' << prefix << i;
}

struct Stats {
  double mean = 0.0;
  double max = 0.0;
};

template <class F> Stats stats_of(const std::vector<SampleRecord> &samples, F f) {
  Stats s;
  if (samples.empty()) return s;
  for (const auto &r : samples) {
    const double v = f(r);
    s.mean += v;
    s.max = std::max(s.max, v);
  }
  s.mean /= static_cast<double>(samples.size());
  return s;
}

nlohmann::json to_json(const Stats &s) { return {{"mean", s.mean}, {"max", s.max}}; }

} // namespace

void SimConfig::validate() const {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ConfigError("sim.t_end must be positive");
  if (plant_substeps < 1) throw ConfigError("sim.plant_substeps must be at least 1");
  if (!(noise_std >= 0.0)) throw ConfigError("sim.noise_std must be non-negative");
  if (!(plant_newton_tol > 0.0)) throw ConfigError("sim.plant_newton_tol must be positive");
}

int SimConfig::samples(double Ts) const { return std::max(1, static_cast<int>(std::lround(t_end / Ts))); }

int SimLog::failures() const {
  return static_cast<int>(std::count_if(samples.begin(), samples.end(), [](const SampleRecord &r) { return r.fallback; }));
}

void SimLog::write_csv(std::ostream &os) const {
  os << "k,t";
  put_header(os, "x", nx);
  put_header(os, "x_meas", nx);
  put_header(os, "u", nu);
  put_header(os, "ref", np);
  os << ",status,fallback,sqp_iters,kkt_stat,kkt_eq,kkt_ineq,cmon_fraction,prediction_error\n";
  for (const auto &r : samples) {
    os << r.k << ',' << num(r.t);
    put_vec(os, r.x);
    put_vec(os, r.x_meas);
    put_vec(os, r.u);
    put_vec(os, r.ref);
    os << ',' << to_string(r.status) << ',' << (r.fallback ? 1 : 0) << ',' << r.sqp_iters;
    if (r.kkt_available) {
      os << ',' << num(r.kkt.stationarity) << ',' << num(r.kkt.eq_violation) << ',' << num(r.kkt.ineq_violation);
    } else {
      os << ",,,";
    }
    os << ',' << num(r.cmon_fraction) << ',' << num(r.prediction_error) << '\n';
  }
}

void SimLog::write_solver_csv(std::ostream &os) const {
  os << "sample,iter,kkt_stat,kkt_eq,kkt_ineq,alpha,merit,merit_new,mu_pen,dd,armijo,line_search_failed,"
        "step_norm,update_fraction,qp_iters,qp_status,t_generation,t_condensing,t_qp,t_line_search,"
        "t_solution_info\n";
  for (const auto &[sample, it] : iterations) {
    os << sample << ',' << it.iter << ',' << num(it.kkt.stationarity) << ',' << num(it.kkt.eq_violation) << ','
       << num(it.kkt.ineq_violation) << ',' << num(it.alpha) << ',' << num(it.merit) << ',' << num(it.merit_new)
       << ',' << num(it.mu_pen) << ',' << num(it.dd) << ',' << (it.armijo_satisfied ? 1 : 0) << ','
       << (it.line_search_failed ? 1 : 0) << ',' << num(it.step_norm) << ',' << num(it.cmon_fraction) << ','
       << it.qp_iters << ',' << to_string(it.qp_status) << ',' << num(it.timings.generation) << ','
       << num(it.timings.condensing) << ',' << num(it.timings.qp) << ',' << num(it.timings.line_search) << ','
       << num(it.timings.solution_info) << '\n';
  }
}

nlohmann::json SimLog::summary() const {
  nlohmann::json j;
  j["samples"] = samples.size();
  j["failures"] = failures();
  j["t_final"] = t_final;
  j["x_final"] = std::vector<double>(x_final.data(), x_final.data() + x_final.size());
  j["solve_time"] = to_json(stats_of(samples, [](const SampleRecord &r) { return r.timings.solve(); }));
  j["wall_time"] = to_json(stats_of(samples, [](const SampleRecord &r) { return r.wall_time; }));
  j["phase_time"] = {
      {"generation", to_json(stats_of(samples, [](const SampleRecord &r) { return r.timings.generation; }))},
      {"condensing", to_json(stats_of(samples, [](const SampleRecord &r) { return r.timings.condensing; }))},
      {"qp", to_json(stats_of(samples, [](const SampleRecord &r) { return r.timings.qp; }))},
      {"line_search", to_json(stats_of(samples, [](const SampleRecord &r) { return r.timings.line_search; }))},
      {"solution_info", to_json(stats_of(samples, [](const SampleRecord &r) { return r.timings.solution_info; }))},
  };
  j["sqp_iters"] = to_json(stats_of(samples, [](const SampleRecord &r) { return double(r.sqp_iters); }));
  j["cmon_update_fraction"] = to_json(stats_of(samples, [](const SampleRecord &r) { return r.cmon_fraction; }));
  j["prediction_error"] = to_json(stats_of(samples, [](const SampleRecord &r) { return r.prediction_error; }));
  j["tracking_error"] = to_json(stats_of(samples, [this](const SampleRecord &r) {
    const int n = static_cast<int>(std::min<Eigen::Index>(r.ref.size(), r.x.size()));
    return n > 0 ? (r.x.head(n) - r.ref.head(n)).lpNorm<Eigen::Infinity>() : r.x.lpNorm<Eigen::Infinity>();
  }));
  if (!samples.empty() && samples.back().kkt_available) {
    const KktResidual &k = samples.back().kkt;
    j["final_kkt"] = {{"stationarity", k.stationarity}, {"eq_violation", k.eq_violation},
                      {"ineq_violation", k.ineq_violation}};
  } else {
    j["final_kkt"] = nullptr;
  }
  return j;
}

Trajectory shift_warm_start(const OcpProblem &problem, const IntegratorConfig &integrator, const Trajectory &traj,
                            const Vec &p) {
  const int N = problem.dims.N;
  traj.validate(problem.dims);
  Trajectory out = traj;
  for (int k = 0; k < N; ++k) {
    out.x[idx(k)] = traj.x[idx(k + 1)];
    out.lambda[idx(k)] = traj.lambda[idx(k + 1)];
  }
  for (int k = 0; k + 1 < N; ++k) {
    out.u[idx(k)] = traj.u[idx(k + 1)];
    out.mu[idx(k)] = traj.mu[idx(k + 1)];
  }
  try {
    out.x[idx(N)] = simulate_interval(problem, integrator, traj.x[idx(N)], traj.u[idx(N - 1)], p, false).x_next;
  } catch (const IntegrationError &) {
    out.x[idx(N)] = traj.x[idx(N)];
  }
  return out;
}

SimLog run_closed_loop(const OcpProblem &problem, const SolverOptions &options, const SimConfig &sim,
                       const Vec &x_init, const std::vector<Vec> &references, std::optional<Trajectory> warm_start) {
  sim.validate();
  options.validate();
  problem.validate();
  const Dims &dims = problem.dims;
  const int samples = sim.samples(dims.Ts);
  if (x_init.size() != dims.nx || !x_init.allFinite()) throw ConfigError("initial plant state is invalid");
  if (static_cast<int>(references.size()) < samples) {
    throw ConfigError("reference series has " + std::to_string(references.size()) + " samples, simulation needs " +
                      std::to_string(samples));
  }
  for (const auto &r : references) {
    if (r.size() != dims.np) throw ConfigError("reference entry does not match the parameter length");
  }
  const OcpProblem &plant = sim.plant ? *sim.plant : problem;
  if (sim.plant) {
    plant.validate();
    if (plant.dims.nx != dims.nx || plant.dims.nu != dims.nu) {
      throw ConfigError("plant model dimensions differ from the controller model");
    }
  }
  IntegratorConfig plant_int;
  plant_int.scheme = sim.plant_scheme;
  plant_int.steps_per_interval = sim.plant_substeps;
  plant_int.newton_tol = sim.plant_newton_tol;
  plant_int.newton_max_iters = std::max(50, options.integrator.newton_max_iters);

  Trajectory traj = warm_start ? *warm_start : Trajectory::constant(dims, x_init, Vec::Zero(dims.nu));
  traj.validate(dims);

  SqpSolver solver(problem, options);
  std::mt19937_64 rng(sim.seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  SimLog log;
  log.nx = dims.nx;
  log.nu = dims.nu;
  log.np = dims.np;
  Vec x = x_init;
  Vec u_prev = traj.u[0];

  for (int k = 0; k < samples; ++k) {
    SampleRecord rec;
    rec.k = k;
    rec.t = k * dims.Ts;
    rec.x = x;
    rec.ref = references[idx(k)];
    rec.x_meas = x;
    if (sim.noise_std > 0.0) {
      for (int i = 0; i < dims.nx; ++i) rec.x_meas[i] += sim.noise_std * noise(rng);
    }

    const auto t0 = std::chrono::steady_clock::now();
    SolveResult res = solver.step(traj, rec.x_meas, rec.ref);
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rec.status = res.report.status;
    rec.sqp_iters = res.report.iters;
    rec.kkt = res.report.kkt;
    rec.kkt_available = res.report.kkt_available;
    rec.timings = res.report.timings;
    rec.cmon_fraction = res.report.cmon_update_fraction.empty() ? 1.0 : res.report.cmon_update_fraction.front();
    for (const auto &it : res.report.iterations) log.iterations.emplace_back(k, it);

    rec.fallback = !res.report.ok();
    rec.u = rec.fallback ? u_prev : Vec(res.traj.u[0]);
    if (!rec.fallback) traj = std::move(res.traj);

    Vec x_next;
    try {
      x_next = integrate(plant, plant_int, x, rec.u, rec.ref, dims.Ts, false).x_next;
    } catch (const IntegrationError &e) {
      throw IntegrationError(std::string("plant simulation failed: ") + e.what(), e.stage(), e.residual());
    }
    try {
      const Vec predicted = simulate_interval(problem, options.integrator, rec.x_meas, rec.u, rec.ref, false).x_next;
      rec.prediction_error = (x_next - predicted).lpNorm<Eigen::Infinity>();
    } catch (const IntegrationError &) {
      rec.prediction_error = std::numeric_limits<double>::infinity();
    }

    traj = shift_warm_start(problem, options.integrator, traj, rec.ref);
    solver.shift_memory();
    u_prev = rec.u;
    x = std::move(x_next);
    log.samples.push_back(std::move(rec));
  }
  log.x_final = x;
  log.t_final = samples * dims.Ts;
  return log;
}

} // namespace rtnmpc
