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

#include <limits>
#include <optional>
#include <vector>

#include "rtnmpc/integrator.hpp"
#include "rtnmpc/ocp.hpp"

namespace rtnmpc {

/// Primal iterate of the multiple-shooting NLP plus its multipliers.
///
/// lambda[0] belongs to the initial-value constraint, lambda[k+1] to the
/// continuity constraint of interval k. mu[k] holds one signed multiplier per
/// path-constraint row (positive: upper bound active, negative: lower bound).
struct Trajectory {
  std::vector<Vec> x;       // N+1 states
  std::vector<Vec> u;       // N inputs
  std::vector<Vec> lambda;  // N+1
  std::vector<Vec> mu;      // N entries of size nc, then one of size ncN

  static Trajectory zeros(const Dims &dims);
  /// Every node at (x, u), multipliers zero.
  static Trajectory constant(const Dims &dims, const Vec &x, const Vec &u);

  void validate(const Dims &dims) const;
};

/// The stage-wise QP in the increments (dx_k, du_k).
struct StageQpData {
  int N = 0;
  int nx = 0;
  int nu = 0;
  std::vector<Mat> H;    // N+1: (nx+nu)^2 for stages, nx^2 terminal
  std::vector<Vec> g;    // N+1
  std::vector<Mat> A;    // N
  std::vector<Mat> B;    // N
  std::vector<Vec> d;    // N: phi_k(x_k, u_k) - x_{k+1}
  std::vector<Vec> phi;  // N: phi_k(x_k, u_k)
  std::vector<Mat> C;    // N+1
  std::vector<Mat> D;    // N
  std::vector<Vec> clb;  // N+1: lower bound minus constraint value
  std::vector<Vec> cub;  // N+1
  Vec dx0;               // x0_hat - x_0
  double objective = 0.0;

  int stage_rows(int k) const { return static_cast<int>(clb[static_cast<std::size_t>(k)].size()); }
  int total_rows() const;
};

struct CmonConfig {
  bool enabled = false;
  double eta_pri = 0.05;
  double eta_dual = std::numeric_limits<double>::infinity();
  double eps_abs = 1e-3;
  double eps_rel = 0.05;
  double eps_den = 1e-12;

  void validate() const;
};

/// Plumbing mapping from solution tolerances to skip thresholds:
/// eta_pri = eta_dual = eps_rel. eps_abs is accepted but unused.
std::pair<double, double> cmon_thresholds_from_tolerances(double eps_abs, double eps_rel);

struct CmonFlags {
  std::vector<char> update_mask;  // 1: sensitivities evaluated this iteration
  Vec kappa;                      // NaN where undefined
  Vec kappa_tilde;                // NaN where undefined or not computed

  double update_fraction() const;
};

/// Linearization point retained for sensitivity reuse.
struct LinearizationMemory {
  StageQpData data;
  Trajectory traj;
};

/// Moves a retained linearization forward by one interval (the last
/// interval is duplicated) so that it lines up with a shifted trajectory.
void shift_linearization(LinearizationMemory &memory);

struct CmonMeasures {
  Vec kappa;
  Vec kappa_tilde;
};

/// Nonlinearity measures per interval.
///
/// kappa_k = |phi_k^i - phi_k^{i-1} - grad phi_k^{i-1} q_k| / |grad phi_k^{i-1} q_k|.
/// kappa_tilde is evaluated along q_k only: the directional derivative
/// grad phi_k^i q_k is supplied by the caller in `cur_directional` (empty
/// skips the dual measure). Degenerate denominators give NaN.
CmonMeasures cmon_measures(const Trajectory &prev_traj, const Trajectory &cur_traj, const StageQpData &prev_data,
                           const std::vector<Vec> &cur_phi, const std::vector<Vec> &cur_directional,
                           double eps_den = 1e-12);

struct GeneratedQp {
  StageQpData data;
  CmonFlags flags;
};

/// Builds the Gauss-Newton stage QP around `traj`. When `cmon` is enabled
/// and `prev` is supplied, intervals whose nonlinearity measure passes the
/// skip test keep the previous (A_k, B_k); every other quantity is always
/// re-evaluated.
GeneratedQp generate_qp(const OcpProblem &problem, const IntegratorConfig &integrator, const Trajectory &traj,
                        const Vec &x0_hat, const Vec &p, const LinearizationMemory *prev = nullptr,
                        const CmonConfig &cmon = {}, int threads = 1);

} // namespace rtnmpc
