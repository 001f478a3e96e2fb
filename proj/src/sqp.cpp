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

#include "rtnmpc/sqp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "rtnmpc/errors.hpp"
#include "rtnmpc/parallel.hpp"

namespace rtnmpc {

namespace {

std::size_t idx(int k) { return static_cast<std::size_t>(k); }

class Stopwatch {
public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_;
};

double inf_norm(const Vec &v) { return v.size() > 0 ? v.lpNorm<Eigen::Infinity>() : 0.0; }

double bound_violation_l1(const Vec &r, const Vec &lb, const Vec &ub) {
  double s = 0.0;
  for (int i = 0; i < r.size(); ++i) s += std::max(0.0, r[i] - ub[i]) + std::max(0.0, lb[i] - r[i]);
  return s;
}

double bound_violation_inf(const Vec &clb, const Vec &cub) {
  // clb = lb - r, cub = ub - r
  double s = 0.0;
  for (int i = 0; i < clb.size(); ++i) s = std::max({s, clb[i], -cub[i]});
  return s;
}

double step_inf_norm(const StageStep &step) {
  double n = 0.0;
  for (const auto &v : step.dx) n = std::max(n, inf_norm(v));
  for (const auto &v : step.du) n = std::max(n, inf_norm(v));
  return n;
}

} // namespace

std::string to_string(SqpMode mode) { return mode == SqpMode::Rti ? "rti" : "converge"; }
std::string to_string(CondensingMode mode) { return mode == CondensingMode::Full ? "full" : "none"; }
std::string to_string(QpPath path) { return path == QpPath::Sparse ? "sparse" : "dense"; }

SqpMode parse_sqp_mode(const std::string &name) {
  if (name == "converge" || name == "line-search") return SqpMode::Converge;
  if (name == "rti") return SqpMode::Rti;
  throw ConfigError("unknown sqp.mode '" + name + "' (expected converge or rti)");
}

CondensingMode parse_condensing_mode(const std::string &name) {
  if (name == "none") return CondensingMode::None;
  if (name == "full") return CondensingMode::Full;
  throw ConfigError("unknown condensing.mode '" + name + "' (expected none or full)");
}

QpPath parse_qp_path(const std::string &name) {
  if (name == "dense") return QpPath::Dense;
  if (name == "sparse") return QpPath::Sparse;
  throw ConfigError("unknown qp.path '" + name + "' (expected dense or sparse)");
}

std::string to_string(SolveStatus status) {
  switch (status) {
  case SolveStatus::Converged: return "converged";
  case SolveStatus::MaxIters: return "max_iters";
  case SolveStatus::QpFailure: return "qp_failure";
  case SolveStatus::IntegrationFailure: return "integration_failure";
  }
  return "unknown";
}

void SqpConfig::validate() const {
  if (max_sqp_iters < 0) throw ConfigError("sqp.max_iters must be non-negative");
  if (!(kkt_tol > 0.0)) throw ConfigError("sqp.kkt_tol must be positive");
  if (!(armijo_eta > 0.0 && armijo_eta < 0.5)) throw ConfigError("sqp.armijo_eta must lie in (0, 0.5)");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) {
    throw ConfigError("sqp.backtrack_factor must lie in (0, 1)");
  }
  if (!(min_alpha > 0.0 && min_alpha <= 1.0)) throw ConfigError("sqp.min_alpha must lie in (0, 1]");
  if (!(merit_rho > 0.0 && merit_rho < 1.0)) throw ConfigError("sqp.merit_rho must lie in (0, 1)");
  if (!(merit_sigma >= 0.0)) throw ConfigError("sqp.merit_sigma must be non-negative");
}

void SolverOptions::validate() const {
  integrator.validate();
  qp.validate();
  sqp.validate();
  cmon.validate();
  if (qp_path == QpPath::Dense && condensing != CondensingMode::Full) {
    throw ConfigError("qp.path=dense requires condensing.mode=full");
  }
  if (qp_path == QpPath::Sparse && condensing != CondensingMode::None) {
    throw ConfigError("qp.path=sparse requires condensing.mode=none");
  }
  if (threads < 1) throw ConfigError("threads must be at least 1");
}

double KktResidual::max() const { return std::max({stationarity, eq_violation, ineq_violation}); }

PhaseTimings &PhaseTimings::operator+=(const PhaseTimings &o) {
  generation += o.generation;
  condensing += o.condensing;
  qp += o.qp;
  line_search += o.line_search;
  solution_info += o.solution_info;
  return *this;
}

MeritTerms merit_terms(const OcpProblem &problem, const IntegratorConfig &integrator, const Trajectory &traj,
                       const Vec &x0_hat, const Vec &p, int threads) {
  const Dims &dims = problem.dims;
  traj.validate(dims);
  const int N = dims.N;
  std::vector<double> cost(idx(N + 1), 0.0), infeas(idx(N + 1), 0.0);
  parallel_for(N + 1, threads, [&](int k) {
    const Vec &xk = traj.x[idx(k)];
    if (k == N) {
      const Vec h = eval_residual(problem, xk, Vec(), p, true);
      cost[idx(k)] = 0.5 * h.dot(problem.WN * h);
      infeas[idx(k)] = bound_violation_l1(eval_constraint(problem, xk, Vec(), p, true), problem.lbN, problem.ubN);
      return;
    }
    const Vec &uk = traj.u[idx(k)];
    const Vec h = eval_residual(problem, xk, uk, p, false);
    cost[idx(k)] = 0.5 * h.dot(problem.weight(k) * h);
    StepResult sim;
    try {
      sim = simulate_interval(problem, integrator, xk, uk, p, false);
    } catch (const IntegrationError &e) {
      throw GenerationError("integration failed on shooting interval " + std::to_string(k) + ": " + e.what(), k);
    }
    infeas[idx(k)] = (traj.x[idx(k + 1)] - sim.x_next).lpNorm<1>() +
                     bound_violation_l1(eval_constraint(problem, xk, uk, p, false), problem.lb, problem.ub);
  });
  MeritTerms t;
  for (double c : cost) t.objective += c;
  t.infeasibility = (x0_hat - traj.x[0]).lpNorm<1>();
  for (double e : infeas) t.infeasibility += e;
  return t;
}

double merit_eval(const OcpProblem &problem, const IntegratorConfig &integrator, const Trajectory &traj,
                  const Vec &x0_hat, const Vec &p, double mu_pen, int threads) {
  const MeritTerms t = merit_terms(problem, integrator, traj, x0_hat, p, threads);
  return t.objective + mu_pen * t.infeasibility;
}

double l1_infeasibility(const StageQpData &qp) {
  double e = qp.dx0.lpNorm<1>();
  for (const auto &d : qp.d) e += d.lpNorm<1>();
  for (int k = 0; k <= qp.N; ++k) {
    const Vec &lo = qp.clb[idx(k)];
    const Vec &hi = qp.cub[idx(k)];
    for (int i = 0; i < lo.size(); ++i) e += std::max(0.0, lo[i]) + std::max(0.0, -hi[i]);
  }
  return e;
}

PenaltyUpdate penalty_and_direction(const StageQpData &qp, const StageStep &step, const MeritState &merit,
                                    const SqpConfig &config) {
  double grad_dot = 0.0;
  double curvature = 0.0;
  Vec z(qp.nx + qp.nu);
  for (int k = 0; k < qp.N; ++k) {
    z << step.dx[idx(k)], step.du[idx(k)];
    grad_dot += qp.g[idx(k)].dot(z);
    curvature += z.dot(qp.H[idx(k)] * z);
  }
  const Vec &xN = step.dx[idx(qp.N)];
  grad_dot += qp.g[idx(qp.N)].dot(xN);
  curvature += xN.dot(qp.H[idx(qp.N)] * xN);

  const double infeas = l1_infeasibility(qp);
  PenaltyUpdate out;
  out.mu_pen = merit.mu_pen;
  if (infeas > 0.0) {
    const double required = (grad_dot + 0.5 * config.merit_sigma * curvature) / ((1.0 - config.merit_rho) * infeas);
    out.mu_pen = std::max(out.mu_pen, required);
  }
  out.dd = grad_dot - out.mu_pen * infeas;
  return out;
}

Trajectory apply_step(const Trajectory &traj, const StageStep &step, double alpha) {
  Trajectory t = traj;
  for (std::size_t k = 0; k < t.x.size(); ++k) {
    t.x[k] += alpha * step.dx[k];
    t.lambda[k] += alpha * (step.lambda[k] - traj.lambda[k]);
    t.mu[k] += alpha * (step.mu[k] - traj.mu[k]);
  }
  for (std::size_t k = 0; k < t.u.size(); ++k) t.u[k] += alpha * step.du[k];
  return t;
}

LineSearchResult line_search(const OcpProblem &problem, const IntegratorConfig &integrator, const Trajectory &traj,
                             const StageStep &step, const MeritState &merit, const SqpConfig &config,
                             const Vec &x0_hat, const Vec &p, int threads) {
  LineSearchResult res;
  double alpha = 1.0;
  while (true) {
    ++res.trials;
    Trajectory trial = apply_step(traj, step, alpha);
    double m_trial = std::numeric_limits<double>::infinity();
    try {
      m_trial = merit_eval(problem, integrator, trial, x0_hat, p, merit.mu_pen, threads);
    } catch (const GenerationError &) {
      // integrator failure at the trial point counts as rejection
    }
    const bool armijo = std::isfinite(m_trial) && m_trial <= merit.last_merit + config.armijo_eta * alpha * merit.last_dd;
    if (armijo) {
      res.alpha = alpha;
      res.traj = std::move(trial);
      res.merit_new = m_trial;
      res.armijo_satisfied = true;
      return res;
    }
    const double next = alpha * config.backtrack_factor;
    if (next < config.min_alpha) {
      res.alpha = config.min_alpha;
      res.traj = apply_step(traj, step, config.min_alpha);
      res.merit_new = merit_eval(problem, integrator, res.traj, x0_hat, p, merit.mu_pen, threads);
      res.armijo_satisfied =
          res.merit_new <= merit.last_merit + config.armijo_eta * config.min_alpha * merit.last_dd;
      res.failed = true;
      return res;
    }
    alpha = next;
  }
}

KktResidual kkt_from_qp(const StageQpData &qp, const Trajectory &traj) {
  KktResidual r;
  const int nx = qp.nx;
  const int nu = qp.nu;
  for (int k = 0; k < qp.N; ++k) {
    Vec grad = qp.g[idx(k)];
    grad.head(nx) += qp.A[idx(k)].transpose() * traj.lambda[idx(k + 1)] - traj.lambda[idx(k)] +
                     qp.C[idx(k)].transpose() * traj.mu[idx(k)];
    grad.tail(nu) += qp.B[idx(k)].transpose() * traj.lambda[idx(k + 1)] + qp.D[idx(k)].transpose() * traj.mu[idx(k)];
    r.stationarity = std::max(r.stationarity, inf_norm(grad));
    r.eq_violation = std::max(r.eq_violation, inf_norm(qp.d[idx(k)]));
  }
  const Vec gN = qp.g[idx(qp.N)] - traj.lambda[idx(qp.N)] + qp.C[idx(qp.N)].transpose() * traj.mu[idx(qp.N)];
  r.stationarity = std::max(r.stationarity, inf_norm(gN));
  r.eq_violation = std::max(r.eq_violation, inf_norm(qp.dx0));
  for (int k = 0; k <= qp.N; ++k) {
    r.ineq_violation = std::max(r.ineq_violation, bound_violation_inf(qp.clb[idx(k)], qp.cub[idx(k)]));
  }
  return r;
}

KktResidual kkt_residual(const OcpProblem &problem, const IntegratorConfig &integrator, const Trajectory &traj,
                         const Vec &x0_hat, const Vec &p, int threads) {
  const GeneratedQp gen = generate_qp(problem, integrator, traj, x0_hat, p, nullptr, {}, threads);
  return kkt_from_qp(gen.data, traj);
}

SqpSolver::SqpSolver(OcpProblem problem, SolverOptions options)
    : problem_(std::move(problem)), options_(std::move(options)) {
  problem_.validate();
  options_.validate();
}

GeneratedQp SqpSolver::generate(const Trajectory &traj, const Vec &x0_hat, const Vec &p, bool force_fresh) {
  const LinearizationMemory *prev = options_.cmon.enabled && !force_fresh ? memory() : nullptr;
  GeneratedQp gen = generate_qp(problem_, options_.integrator, traj, x0_hat, p, prev, options_.cmon, options_.threads);
  if (options_.cmon.enabled) memory_ = LinearizationMemory{gen.data, traj};
  return gen;
}

SqpSolver::QpStep SqpSolver::solve_qp(const StageQpData &qp) const {
  QpStep out;
  if (options_.qp_path == QpPath::Sparse) {
    Stopwatch sw;
    out.sol = solve_sparse(qp, qp.dx0, options_.qp);
    out.timings.qp = sw.seconds();
    return out;
  }
  Stopwatch sw_cond;
  const CondensedQp cond = condense(qp, qp.dx0);
  out.timings.condensing = sw_cond.seconds();
  Stopwatch sw_qp;
  out.sol = solve_dense(cond.H, cond.g, cond.C, cond.lb, cond.ub, options_.qp);
  out.timings.qp = sw_qp.seconds();
  if (out.sol.primal.size() == cond.H.rows()) {
    Stopwatch sw_exp;
    out.sol.step = expand(qp, cond, out.sol.primal, out.sol.row_duals());
    out.timings.condensing += sw_exp.seconds();
  }
  return out;
}

SolveResult SqpSolver::solve(const Trajectory &traj0, const Vec &x0_hat, const Vec &p) {
  const SqpConfig &cfg = options_.sqp;
  SolveResult result;
  SolveReport &report = result.report;
  Trajectory traj = traj0;
  MeritState merit;
  bool force_fresh = false;

  for (int iter = 0;; ++iter) {
    IterationRecord rec;
    rec.iter = iter;
    GeneratedQp gen;
    try {
      Stopwatch sw;
      gen = generate(traj, x0_hat, p, force_fresh);
      rec.timings.generation = sw.seconds();
    } catch (const GenerationError &e) {
      report.status = SolveStatus::IntegrationFailure;
      report.message = e.what();
      break;
    }
    rec.cmon_fraction = gen.flags.update_fraction();
    {
      Stopwatch sw;
      const bool fresh = rec.cmon_fraction == 1.0;
      rec.kkt = fresh ? kkt_from_qp(gen.data, traj)
                      : kkt_residual(problem_, options_.integrator, traj, x0_hat, p, options_.threads);
      rec.timings.solution_info = sw.seconds();
    }
    report.kkt = rec.kkt;
    report.kkt_available = true;
    if (rec.kkt.max() <= cfg.kkt_tol) {
      report.status = SolveStatus::Converged;
      report.timings += rec.timings;
      break;
    }
    if (iter >= cfg.max_sqp_iters) {
      report.status = SolveStatus::MaxIters;
      report.timings += rec.timings;
      break;
    }

    QpStep qps = solve_qp(gen.data);
    rec.timings += qps.timings;
    rec.qp_iters = qps.sol.iters;
    rec.qp_status = qps.sol.status;
    if (qps.sol.status == QpStatus::NumericalFailure || qps.sol.status == QpStatus::Infeasible ||
        qps.sol.step.dx.empty()) {
      report.status = SolveStatus::QpFailure;
      report.message = "QP solver returned " + to_string(qps.sol.status) + " at SQP iteration " + std::to_string(iter);
      report.timings += rec.timings;
      report.iterations.push_back(rec);
      break;
    }
    const StageStep &step = qps.sol.step;
    rec.step_norm = step_inf_norm(step);

    Stopwatch sw_ls;
    const PenaltyUpdate pen = penalty_and_direction(gen.data, step, merit, cfg);
    merit.mu_pen = pen.mu_pen;
    merit.last_dd = pen.dd;
    merit.last_merit = merit_eval(problem_, options_.integrator, traj, x0_hat, p, merit.mu_pen, options_.threads);
    const LineSearchResult ls =
        line_search(problem_, options_.integrator, traj, step, merit, cfg, x0_hat, p, options_.threads);
    rec.timings.line_search = sw_ls.seconds();

    rec.alpha = ls.alpha;
    rec.merit = merit.last_merit;
    rec.merit_new = ls.merit_new;
    rec.mu_pen = merit.mu_pen;
    rec.dd = merit.last_dd;
    rec.armijo_satisfied = ls.armijo_satisfied;
    rec.line_search_failed = ls.failed;
    report.line_search_failed = report.line_search_failed || ls.failed;
    report.alpha_history.push_back(ls.alpha);
    report.cmon_update_fraction.push_back(rec.cmon_fraction);
    report.timings += rec.timings;
    report.iterations.push_back(rec);
    report.iters = iter + 1;
    traj = ls.traj;
    // A rejected step under reused sensitivities is retried on a fresh linearization.
    force_fresh = ls.failed && rec.cmon_fraction < 1.0;
    if (observer_) observer_(rec);
  }
  result.traj = std::move(traj);
  return result;
}

SolveResult SqpSolver::rti_step(const Trajectory &traj, const Vec &x0_hat, const Vec &p) {
  SolveResult result;
  SolveReport &report = result.report;
  result.traj = traj;
  IterationRecord rec;
  GeneratedQp gen;
  try {
    Stopwatch sw;
    gen = generate(traj, x0_hat, p);
    rec.timings.generation = sw.seconds();
  } catch (const GenerationError &e) {
    report.status = SolveStatus::IntegrationFailure;
    report.message = e.what();
    return result;
  }
  rec.cmon_fraction = gen.flags.update_fraction();
  if (rec.cmon_fraction == 1.0) rec.kkt = kkt_from_qp(gen.data, traj);

  QpStep qps = solve_qp(gen.data);
  rec.timings += qps.timings;
  rec.qp_iters = qps.sol.iters;
  rec.qp_status = qps.sol.status;
  report.cmon_update_fraction.push_back(rec.cmon_fraction);
  if (qps.sol.status == QpStatus::NumericalFailure || qps.sol.status == QpStatus::Infeasible ||
      qps.sol.step.dx.empty()) {
    report.status = SolveStatus::QpFailure;
    report.message = "QP solver returned " + to_string(qps.sol.status);
    report.timings += rec.timings;
    report.iterations.push_back(rec);
    return result;
  }
  rec.step_norm = step_inf_norm(qps.sol.step);
  rec.alpha = 1.0;
  result.traj = apply_step(traj, qps.sol.step, 1.0);
  report.iters = 1;
  report.alpha_history.push_back(1.0);
  report.status = SolveStatus::Converged;

  if (options_.sqp.rti_report_kkt) {
    Stopwatch sw;
    try {
      report.kkt = kkt_residual(problem_, options_.integrator, result.traj, x0_hat, p, options_.threads);
      report.kkt_available = true;
    } catch (const GenerationError &) {
      report.kkt_available = false;
    }
    rec.timings.solution_info = sw.seconds();
  }
  report.timings += rec.timings;
  report.iterations.push_back(rec);
  if (observer_) observer_(rec);
  return result;
}

SolveResult SqpSolver::step(const Trajectory &traj, const Vec &x0_hat, const Vec &p) {
  return options_.sqp.mode == SqpMode::Rti ? rti_step(traj, x0_hat, p) : solve(traj, x0_hat, p);
}

SolveResult sqp_solve(const OcpProblem &problem, const SolverOptions &options, const Trajectory &traj0,
                      const Vec &x0_hat, const Vec &p) {
  SqpSolver solver(problem, options);
  return solver.solve(traj0, x0_hat, p);
}

SolveResult rti_step(const OcpProblem &problem, const SolverOptions &options, const Trajectory &traj,
                     const Vec &x0_hat, const Vec &p) {
  SqpSolver solver(problem, options);
  return solver.rti_step(traj, x0_hat, p);
}

} // namespace rtnmpc
