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

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtnmpc/sqp.hpp"

namespace rtnmpc {

struct SimConfig {
  double t_end = 5.0;
  int plant_substeps = 10;        // plant step = Ts / plant_substeps
  double noise_std = 0.0;         // additive Gaussian measurement noise
  std::uint64_t seed = 0;
  Scheme plant_scheme = Scheme::IrkGl3;
  double plant_newton_tol = 1e-12;
  /// Optional plant with different parameters than the controller model.
  std::shared_ptr<const OcpProblem> plant;

  void validate() const;
  int samples(double Ts) const;
};

struct SampleRecord {
  int k = 0;
  double t = 0.0;
  Vec x;                 // plant state at the sample
  Vec x_meas;            // state handed to the controller
  Vec u;                 // applied input
  Vec ref;               // online parameters
  SolveStatus status = SolveStatus::Converged;
  bool fallback = false; // previous input held
  int sqp_iters = 0;
  KktResidual kkt;
  bool kkt_available = false;
  double cmon_fraction = 1.0;
  double prediction_error = 0.0;  // |plant x_{k+1} - phi(x_meas, u)|_inf
  PhaseTimings timings;
  double wall_time = 0.0;
};

struct SimLog {
  int nx = 0;
  int nu = 0;
  int np = 0;
  std::vector<SampleRecord> samples;
  std::vector<std::pair<int, IterationRecord>> iterations;  // (sample, record)
  Vec x_final;
  double t_final = 0.0;

  int failures() const;
  /// One row per sample: t, x, u, ref, status and solver diagnostics. Contains no wall-clock data.
  void write_csv(std::ostream &os) const;
  /// One row per SQP iteration including phase timings.
  void write_solver_csv(std::ostream &os) const;
  nlohmann::json summary() const;
};

/// Advances the warm start by one interval. The last input is duplicated and
/// the last state re-propagated through the integrator; multipliers shift alike.
Trajectory shift_warm_start(const OcpProblem &problem, const IntegratorConfig &integrator, const Trajectory &traj,
                            const Vec &p);

/// Closed-loop simulation. `references` holds the online parameters per
/// sample and must cover every sample.
SimLog run_closed_loop(const OcpProblem &problem, const SolverOptions &options, const SimConfig &sim,
                       const Vec &x_init, const std::vector<Vec> &references,
                       std::optional<Trajectory> warm_start = std::nullopt);

} // namespace rtnmpc
