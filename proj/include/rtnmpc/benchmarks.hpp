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
#include <string>
#include <vector>

#include "rtnmpc/ocp.hpp"

namespace rtnmpc {

/// A registered test problem with its default scenario.
struct Benchmark {
  OcpProblem problem;
  Vec x_init;                          // closed-loop initial plant state
  Vec u_init;                          // input used for the cold-start trajectory
  std::function<Vec(double)> reference;  // online parameters as a function of time
  std::string description;
};

struct BenchmarkOptions {
  int N = 0;           // 0 selects the benchmark default
  double Ts = 0.0;     // 0 selects the benchmark default
  int masses = 4;      // free masses of the chain benchmarks
};

/// Cart-pole. x = (cart position, pole angle, cart velocity, angular rate),
/// angle 0 is upright; u = horizontal force on the cart, |F| <= 20.
struct PendulumParams {
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double pole_length = 0.8;
  double gravity = 9.81;
  double force_limit = 20.0;
};

/// Chain of point masses hanging between a fixed anchor at the origin and a
/// velocity-controlled end point.
/// x = (positions of the free masses, their velocities, end position), u = end velocity.
struct ChainParams {
  int masses = 4;
  double mass = 0.03;
  double stiffness = 1.0;
  double rest_length = 0.033;
  double gravity = 9.81;
  double velocity_limit = 1.0;
  bool linear = false;   // Hooke springs with zero rest length
};

OcpProblem make_pendulum_problem(const PendulumParams &params = {}, int N = 40, double Ts = 0.05);
OcpProblem make_chain_problem(const ChainParams &params = {}, int N = 50, double Ts = 0.1);
/// Double integrator with a quadratic cost and no constraints.
OcpProblem make_lqr_problem(int N = 20, double Ts = 0.1);

/// Resting configuration of the chain for a given end position.
Vec chain_rest_state(const OcpProblem &chain, const Vec &end_position);

Benchmark make_benchmark(const std::string &name, const BenchmarkOptions &options = {});
std::vector<std::string> benchmark_names();

/// Online parameters at every control sample.
std::vector<Vec> reference_series(const Benchmark &bench, int samples);

} // namespace rtnmpc
