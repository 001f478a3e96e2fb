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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rtnmpc/integrator.hpp"
#include "rtnmpc/qp.hpp"
#include "rtnmpc/shooting.hpp"

namespace rtnmpc {

enum class SqpMode { Converge, Rti };
enum class CondensingMode { None, Full };
enum class QpPath { Dense, Sparse };

std::string to_string(SqpMode mode);
std::string to_string(CondensingMode mode);
std::string to_string(QpPath path);
SqpMode parse_sqp_mode(const std::string &name);
CondensingMode parse_condensing_mode(const std::string &name);
QpPath parse_qp_path(const std::string &name);

struct SqpConfig {
  SqpMode mode = SqpMode::Converge;
  int max_sqp_iters = 30;
  double kkt_tol = 1e-6;
  double armijo_eta = 1e-4;
  double backtrack_factor = 0.5;
  double min_alpha = 1e-4;
  double merit_rho = 0.5;
  double merit_sigma = 1.0;
  bool rti_report_kkt = true;  // recompute KKT at the RTI output (extra sensitivity sweep)

  void validate() const;
};

/// Everything a solver instance needs besides the problem.
struct SolverOptions {
  IntegratorConfig integrator;
  CondensingMode condensing = CondensingMode::Full;
  QpPath qp_path = QpPath::Dense;
  QpSolverConfig qp;
  SqpConfig sqp;
  CmonConfig cmon;
  int threads = 1;

  /// Also rejects dense+none and sparse+full.
  void validate() const;
};

struct KktResidual {
  double stationarity = 0.0;
  double eq_violation = 0.0;
  double ineq_violation = 0.0;

  double max() const;
};

struct MeritState {
  double mu_pen = 0.0;
  double last_merit = 0.0;
  double last_dd = 0.0;
};

struct MeritTerms {
  double objective = 0.0;       // l(w)
  double infeasibility = 0.0;   // ||e(w)||_1
};

struct PhaseTimings {
  double generation = 0.0;
  double condensing = 0.0;
  double qp = 0.0;
  double line_search = 0.0;
  double solution_info = 0.0;

  /// Solver time without the optional KKT bookkeeping.
  double solve() const { return generation + condensing + qp + line_search; }
  PhaseTimings &operator+=(const PhaseTimings &o);
};

struct IterationRecord {
  int iter = 0;
  KktResidual kkt;              // at the linearization point
  double alpha = 0.0;
  double merit = 0.0;           // m(w; mu) before the step
  double merit_new = 0.0;       // m(w + alpha dw; mu)
  double mu_pen = 0.0;
  double dd = 0.0;              // directional derivative D
  bool armijo_satisfied = true;
  bool line_search_failed = false;
  double step_norm = 0.0;       // infinity norm of (dx, du)
  double cmon_fraction = 1.0;
  int qp_iters = 0;
  QpStatus qp_status = QpStatus::Optimal;
  PhaseTimings timings;
};

enum class SolveStatus { Converged, MaxIters, QpFailure, IntegrationFailure };
std::string to_string(SolveStatus status);

struct SolveReport {
  SolveStatus status = SolveStatus::MaxIters;
  int iters = 0;
  KktResidual kkt;              // at the returned iterate
  bool kkt_available = false;
  std::vector<double> alpha_history;
  std::vector<double> cmon_update_fraction;
  std::vector<IterationRecord> iterations;
  PhaseTimings timings;
  bool line_search_failed = false;
  std::string message;

  bool ok() const { return status == SolveStatus::Converged || status == SolveStatus::MaxIters; }
};

struct SolveResult {
  Trajectory traj;
  SolveReport report;
};

/// Objective and l1 infeasibility at `traj` (one integration per interval).
MeritTerms merit_terms(const OcpProblem &problem, const IntegratorConfig &integrator, const Trajectory &traj,
                       const Vec &x0_hat, const Vec &p, int threads = 1);

/// m(w; mu) = l(w) + mu ||e(w)||_1.
double merit_eval(const OcpProblem &problem, const IntegratorConfig &integrator, const Trajectory &traj,
                  const Vec &x0_hat, const Vec &p, double mu_pen, int threads = 1);

/// ||e(w)||_1 from the generated QP data (initial-value gap, defects and bound violations).
double l1_infeasibility(const StageQpData &qp);

struct PenaltyUpdate {
  double mu_pen = 0.0;
  double dd = 0.0;
};

/// Penalty parameter and directional derivative for the l1 merit function.
/// mu >= (grad_l' dw + sigma/2 dw' H dw) / ((1 - rho) ||e||_1) when ||e||_1 > 0,
/// never below the previous value; D = grad_l' dw - mu ||e||_1.
PenaltyUpdate penalty_and_direction(const StageQpData &qp, const StageStep &step, const MeritState &merit,
                                    const SqpConfig &config);

struct LineSearchResult {
  double alpha = 1.0;
  Trajectory traj;
  double merit_new = 0.0;
  bool armijo_satisfied = true;
  bool failed = false;
  int trials = 0;
};

/// Trajectory advanced by alpha along the primal step; multipliers move the
/// same fraction towards the QP multipliers.
Trajectory apply_step(const Trajectory &traj, const StageStep &step, double alpha);

/// Backtracking on the l1 merit function with the Armijo condition.
LineSearchResult line_search(const OcpProblem &problem, const IntegratorConfig &integrator, const Trajectory &traj,
                             const StageStep &step, const MeritState &merit, const SqpConfig &config,
                             const Vec &x0_hat, const Vec &p, int threads = 1);

/// First-order optimality of `traj` with exactly evaluated sensitivities.
KktResidual kkt_residual(const OcpProblem &problem, const IntegratorConfig &integrator, const Trajectory &traj,
                         const Vec &x0_hat, const Vec &p, int threads = 1);

/// Same measure from already generated QP data (valid when every interval
/// carries fresh sensitivities).
KktResidual kkt_from_qp(const StageQpData &qp, const Trajectory &traj);

/// A solver instance: one in-flight solve, retains the linearization used by
/// sensitivity reuse across iterations and across RTI samples.
class SqpSolver {
public:
  SqpSolver(OcpProblem problem, SolverOptions options);

  /// Full SQP with l1-merit line search until the KKT tolerance or the
  /// iteration limit.
  SolveResult solve(const Trajectory &traj0, const Vec &x0_hat, const Vec &p);

  /// One Gauss-Newton step with alpha = 1. On QP failure the input
  /// trajectory is returned unchanged and the report says so.
  SolveResult rti_step(const Trajectory &traj, const Vec &x0_hat, const Vec &p);

  /// Dispatches on options().sqp.mode.
  SolveResult step(const Trajectory &traj, const Vec &x0_hat, const Vec &p);

  /// Called after every accepted SQP step (and once per RTI step).
  void set_observer(std::function<void(const IterationRecord &)> observer) { observer_ = std::move(observer); }

  void reset_memory() { memory_.reset(); }
  /// Keeps the retained linearization aligned with a shifted warm start.
  void shift_memory() {
    if (memory_) shift_linearization(*memory_);
  }
  const LinearizationMemory *memory() const { return memory_ ? &*memory_ : nullptr; }

  const OcpProblem &problem() const { return problem_; }
  const SolverOptions &options() const { return options_; }

private:
  struct QpStep {
    QpSolution sol;
    PhaseTimings timings;
  };
  QpStep solve_qp(const StageQpData &qp) const;
  GeneratedQp generate(const Trajectory &traj, const Vec &x0_hat, const Vec &p, bool force_fresh = false);

  OcpProblem problem_;
  SolverOptions options_;
  std::optional<LinearizationMemory> memory_;
  std::function<void(const IterationRecord &)> observer_;
};

SolveResult sqp_solve(const OcpProblem &problem, const SolverOptions &options, const Trajectory &traj0,
                      const Vec &x0_hat, const Vec &p);
SolveResult rti_step(const OcpProblem &problem, const SolverOptions &options, const Trajectory &traj,
                     const Vec &x0_hat, const Vec &p);

} // namespace rtnmpc
