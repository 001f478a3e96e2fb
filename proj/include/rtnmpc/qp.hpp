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

#include <string>
#include <vector>

#include "rtnmpc/condensing.hpp"
#include "rtnmpc/shooting.hpp"

namespace rtnmpc {

enum class QpStatus { Optimal, MaxIters, Infeasible, NumericalFailure };

std::string to_string(QpStatus status);

struct QpSolverConfig {
  double tol = 1e-8;       // stationarity, feasibility and complementarity bound
  int max_iters = 100;
  double reg_eps = 1e-9;   // Hessian regularization floor

  void validate() const;
};

/// Result of either interior-point backend.
///
/// For the dense solver `primal` is the decision vector. For the
/// stage-structured solver `primal` stacks (dx_0, du_0, ..., dx_N) and
/// `step` carries the same data per stage together with the continuity
/// multipliers.
struct QpSolution {
  Vec primal;
  Vec dual_lower;  // per constraint row, >= 0
  Vec dual_upper;  // per constraint row, >= 0, at most one of the pair nonzero
  StageStep step;  // filled by solve_sparse (and by the dense path after expansion)
  QpStatus status = QpStatus::NumericalFailure;
  int iters = 0;
  double kkt_residual = 0.0;
  std::vector<double> barrier_history;  // centering target per accepted iteration

  /// Signed row multipliers, dual_upper - dual_lower.
  Vec row_duals() const { return dual_upper - dual_lower; }
};

/// Primal-dual interior point (Mehrotra predictor-corrector) for
///   min 0.5 x'Hx + g'x  s.t.  lb <= Cx <= ub.
/// Infinite bounds are allowed and simply carry no slack.
QpSolution solve_dense(const Mat &H, const Vec &g, const Mat &C, const Vec &lb, const Vec &ub,
                       const QpSolverConfig &config = {});

/// Same interior-point iteration on the stage-wise QP; each Newton system
/// is solved with a backward Riccati recursion.
QpSolution solve_sparse(const StageQpData &qp, const Vec &dx0, const QpSolverConfig &config = {});

/// Condense, solve densely, expand.
QpSolution solve_condensed(const StageQpData &qp, const Vec &dx0, const QpSolverConfig &config = {});

} // namespace rtnmpc
