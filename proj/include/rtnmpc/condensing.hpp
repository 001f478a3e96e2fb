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

#include <vector>

#include "rtnmpc/shooting.hpp"

namespace rtnmpc {

/// Dense QP in the input increments obtained by eliminating the states:
/// dx = G du + e, with dx stacked over nodes 0..N.
struct CondensedQp {
  int N = 0;
  int nx = 0;
  int nu = 0;
  Mat H;   // (N nu)^2
  Vec g;   // N nu
  Mat C;   // all stage rows, then terminal rows
  Vec lb;
  Vec ub;
  Mat G;   // (N+1) nx x N nu, block lower triangular
  Vec e;   // (N+1) nx

  /// Rows of C belonging to node k.
  int row_offset(int k) const { return row_offsets.at(static_cast<std::size_t>(k)); }
  std::vector<int> row_offsets;  // N+2 entries
};

/// Stage-wise primal/dual step recovered from a QP solution.
struct StageStep {
  std::vector<Vec> dx;      // N+1
  std::vector<Vec> du;      // N
  std::vector<Vec> lambda;  // N+1, continuity multipliers of the QP
  std::vector<Vec> mu;      // N+1, signed path multipliers (upper minus lower)
};

CondensedQp condense(const StageQpData &qp, const Vec &dx0);

/// Undoes the condensing: states from dx = G du + e, continuity multipliers
/// by the backward recursion of the stage stationarity conditions.
/// `row_duals` holds the signed multipliers of the condensed rows.
StageStep expand(const StageQpData &qp, const CondensedQp &cond, const Vec &du, const Vec &row_duals);

/// Value of the stage-wise QP objective at (dx, du).
double stage_qp_objective(const StageQpData &qp, const std::vector<Vec> &dx, const std::vector<Vec> &du);

/// Value of the condensed QP objective at du (constant terms dropped).
double condensed_objective(const CondensedQp &cond, const Vec &du);

} // namespace rtnmpc
