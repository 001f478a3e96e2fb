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

#include <span>

#include "oracles.hpp"
#include "rtnmpc/ocp.hpp"

namespace rtnmpc::testing {

/// Van der Pol oscillator with an additive input on the second state.
struct VanDerPol {
  double mu = 1.0;
  template <class T> void dynamics(std::span<const T> x, std::span<const T> u, std::span<const double>,
                                   std::span<T> xdot) const {
    xdot[0] = x[1];
    xdot[1] = mu * (1.0 - x[0] * x[0]) * x[1] - x[0] + u[0];
  }
  template <class T> void stage_residual(std::span<const T> x, std::span<const T> u, std::span<const double>,
                                         std::span<T> h) const {
    h[0] = x[0];
    h[1] = x[1];
    h[2] = u[0];
  }
  template <class T> void terminal_residual(std::span<const T> x, std::span<const double>, std::span<T> h) const {
    h[0] = x[0];
    h[1] = x[1];
  }
  template <class T> void stage_constraint(std::span<const T>, std::span<const T> u, std::span<const double>,
                                           std::span<T> r) const {
    r[0] = u[0];
  }
  template <class T> void terminal_constraint(std::span<const T>, std::span<const double>, std::span<T>) const {}
};

inline OcpProblem make_vdp_problem(int N = 10, double Ts = 0.1, double mu = 1.0) {
  OcpProblem pb;
  pb.name = "vdp";
  pb.dims = Dims{2, 1, 3, 2, 1, 0, N, Ts, 0};
  pb.model = wrap_model(VanDerPol{mu});
  pb.W = Mat::Identity(3, 3);
  pb.WN = Mat::Identity(2, 2);
  pb.lb = Vec::Constant(1, -1.0);
  pb.ub = Vec::Constant(1, 1.0);
  pb.lbN = Vec(0);
  pb.ubN = Vec(0);
  pb.default_params = Vec(0);
  return pb;
}

/// xdot = Ac x + Bc u, h = (x, u).
struct LinearModel {
  Mat Ac, Bc;
  template <class T> void dynamics(std::span<const T> x, std::span<const T> u, std::span<const double>,
                                   std::span<T> xdot) const {
    for (int i = 0; i < Ac.rows(); ++i) {
      T acc(0.0);
      for (int j = 0; j < Ac.cols(); ++j) acc += Ac(i, j) * x[j];
      for (int j = 0; j < Bc.cols(); ++j) acc += Bc(i, j) * u[j];
      xdot[i] = acc;
    }
  }
  template <class T> void stage_residual(std::span<const T> x, std::span<const T> u, std::span<const double>,
                                         std::span<T> h) const {
    const auto nx = x.size();
    for (std::size_t i = 0; i < nx; ++i) h[i] = x[i];
    for (std::size_t i = 0; i < u.size(); ++i) h[nx + i] = u[i];
  }
  template <class T> void terminal_residual(std::span<const T> x, std::span<const double>, std::span<T> h) const {
    for (std::size_t i = 0; i < x.size(); ++i) h[i] = x[i];
  }
  template <class T> void stage_constraint(std::span<const T>, std::span<const T>, std::span<const double>,
                                           std::span<T>) const {}
  template <class T> void terminal_constraint(std::span<const T>, std::span<const double>, std::span<T>) const {}
};

inline OcpProblem make_linear_problem(Rng &rng, int nx, int nu, int N, double Ts = 0.1) {
  OcpProblem pb;
  pb.name = "linear";
  pb.dims = Dims{nx, nu, nx + nu, nx, 0, 0, N, Ts, 0};
  pb.model = wrap_model(LinearModel{random_matrix(rng, nx, nx, 0.5), random_matrix(rng, nx, nu)});
  const Mat L = random_matrix(rng, nx + nu, nx + nu, 0.5);
  pb.W = L * L.transpose() + 0.1 * Mat::Identity(nx + nu, nx + nu);
  pb.WN = Mat::Identity(nx, nx);
  pb.lb = pb.ub = pb.lbN = pb.ubN = pb.default_params = Vec(0);
  pb.validate();
  return pb;
}

/// One state that never moves and one input; h = u.
struct ScalarModel {
  template <class T> void dynamics(std::span<const T>, std::span<const T>, std::span<const double>,
                                   std::span<T> xdot) const {
    xdot[0] = T(0.0);
  }
  template <class T> void stage_residual(std::span<const T>, std::span<const T> u, std::span<const double>,
                                         std::span<T> h) const {
    h[0] = u[0];
  }
  template <class T> void terminal_residual(std::span<const T> x, std::span<const double>, std::span<T> h) const {
    h[0] = x[0];
  }
  template <class T> void stage_constraint(std::span<const T>, std::span<const T>, std::span<const double>,
                                           std::span<T>) const {}
  template <class T> void terminal_constraint(std::span<const T>, std::span<const double>, std::span<T>) const {}
};

inline OcpProblem make_scalar_problem() {
  OcpProblem pb;
  pb.name = "scalar";
  pb.dims = Dims{1, 1, 1, 1, 0, 0, 1, 1.0, 0};
  pb.model = wrap_model(ScalarModel{});
  pb.W = Mat::Identity(1, 1);
  pb.WN = Mat::Zero(1, 1);
  pb.lb = pb.ub = pb.lbN = pb.ubN = pb.default_params = Vec(0);
  pb.validate();
  return pb;
}

} // namespace rtnmpc::testing
