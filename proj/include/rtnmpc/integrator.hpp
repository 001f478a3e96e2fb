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

#include "rtnmpc/ocp.hpp"

namespace rtnmpc {

enum class Scheme { Erk4, IrkGl2, IrkGl3 };

std::string to_string(Scheme scheme);
/// Accepts "erk4", "irk-gl2", "irk-gl3"; throws ConfigError otherwise.
Scheme parse_scheme(const std::string &name);

struct IntegratorConfig {
  Scheme scheme = Scheme::Erk4;
  int steps_per_interval = 2;
  double newton_tol = 1e-10;   // infinity norm of the stage residual (implicit schemes)
  int newton_max_iters = 25;

  void validate() const;
};

/// State after one step or interval, with sensitivities of the discrete map.
struct StepResult {
  Vec x_next;
  Mat A;  // d x_next / d x
  Mat B;  // d x_next / d u
  int newton_iters = 0;  // summed over sub-steps, zero for explicit schemes
};

/// Classical RK4. With sensitivities the variational recursion of the four
/// stages is propagated, i.e. the exact derivative of the discrete update.
StepResult erk4_step(const OcpProblem &problem, const Vec &x, const Vec &u, const Vec &p, double h,
                     bool with_sens);

/// Gauss-Legendre collocation with `stages` = 2 (order 4) or 3 (order 6).
/// Stage derivatives are found by full Newton; sensitivities come from the
/// implicit function theorem at the converged stages.
StepResult irk_gl_step(const OcpProblem &problem, const Vec &x, const Vec &u, const Vec &p, double h, int stages,
                       bool with_sens, double newton_tol = 1e-10, int newton_max_iters = 25);

/// One scheme step of length h, dispatched on config.scheme.
StepResult integrator_step(const OcpProblem &problem, const IntegratorConfig &config, const Vec &x, const Vec &u,
                           const Vec &p, double h, bool with_sens);

/// steps_per_interval sub-steps covering `duration`, chaining sensitivities.
StepResult integrate(const OcpProblem &problem, const IntegratorConfig &config, const Vec &x, const Vec &u,
                     const Vec &p, double duration, bool with_sens);

/// The shooting operator phi_k over one interval of length Ts.
StepResult simulate_interval(const OcpProblem &problem, const IntegratorConfig &config, const Vec &x, const Vec &u,
                             const Vec &p, bool with_sens = true);

} // namespace rtnmpc
