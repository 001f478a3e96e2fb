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

#include "rtnmpc/benchmarks.hpp"

#include <cmath>
#include <numbers>

#include "rtnmpc/errors.hpp"

namespace rtnmpc {

namespace {

template <class T> using CSpan = std::span<const T>;
template <class T> using MSpan = std::span<T>;
using PSpan = std::span<const double>;

struct PendulumModel {
  PendulumParams prm;

  template <class T> void dynamics(CSpan<T> x, CSpan<T> u, PSpan, MSpan<T> xdot) const {
    using std::cos;
    using std::sin;
    const double M = prm.cart_mass;
    const double m = prm.pole_mass;
    const double l = prm.pole_length;
    const double g = prm.gravity;
    const T s = sin(x[1]);
    const T c = cos(x[1]);
    const T w = x[3];
    const T den = M + m - m * c * c;
    xdot[0] = x[2];
    xdot[1] = w;
    xdot[2] = (-m * l * s * w * w + m * g * c * s + u[0]) / den;
    xdot[3] = (u[0] * c - m * l * w * w * s * c + (M + m) * g * s) / (l * den);
  }
  template <class T> void stage_residual(CSpan<T> x, CSpan<T> u, PSpan p, MSpan<T> h) const {
    for (int i = 0; i < 4; ++i) h[i] = x[i] - p[i];
    h[4] = u[0];
  }
  template <class T> void terminal_residual(CSpan<T> x, PSpan p, MSpan<T> h) const {
    for (int i = 0; i < 4; ++i) h[i] = x[i] - p[i];
  }
  template <class T> void stage_constraint(CSpan<T>, CSpan<T> u, PSpan, MSpan<T> r) const { r[0] = u[0]; }
  template <class T> void terminal_constraint(CSpan<T>, PSpan, MSpan<T>) const {}
};

struct ChainModel {
  ChainParams prm;

  // Force pulling mass a towards mass b.
  template <class T> void spring(const T *a, const T *b, T *f) const {
    using std::sqrt;
    T dx[3] = {b[0] - a[0], b[1] - a[1], b[2] - a[2]};
    T scale = T(prm.stiffness);
    if (!prm.linear) {
      const T len = sqrt(dx[0] * dx[0] + dx[1] * dx[1] + dx[2] * dx[2]);
      scale = prm.stiffness * (1.0 - prm.rest_length / len);
    }
    for (int i = 0; i < 3; ++i) f[i] = scale * dx[i];
  }

  template <class T> void dynamics(CSpan<T> x, CSpan<T> u, PSpan, MSpan<T> xdot) const {
    const int M = prm.masses;
    const T anchor[3] = {T(0.0), T(0.0), T(0.0)};
    const T *pos = x.data();
    const T *vel = x.data() + 3 * M;
    const T *end = x.data() + 6 * M;
    T left[3];
    spring(pos, anchor, left);
    for (int j = 0; j < M; ++j) {
      T right[3];
      spring(pos + 3 * j, j + 1 < M ? pos + 3 * (j + 1) : end, right);
      for (int i = 0; i < 3; ++i) {
        xdot[3 * j + i] = vel[3 * j + i];
        xdot[3 * M + 3 * j + i] = (right[i] + left[i]) / prm.mass;
        left[i] = -right[i];
      }
      xdot[3 * M + 3 * j + 2] -= prm.gravity;
    }
    for (int i = 0; i < 3; ++i) xdot[6 * M + i] = u[i];
  }
  template <class T> void stage_residual(CSpan<T> x, CSpan<T> u, PSpan p, MSpan<T> h) const {
    terminal_residual(x, p, h);
    const int M = prm.masses;
    for (int i = 0; i < 3; ++i) h[3 + 3 * M + i] = u[i];
  }
  template <class T> void terminal_residual(CSpan<T> x, PSpan p, MSpan<T> h) const {
    const int M = prm.masses;
    for (int i = 0; i < 3; ++i) h[i] = x[6 * M + i] - p[i];
    for (int i = 0; i < 3 * M; ++i) h[3 + i] = x[3 * M + i];
  }
  template <class T> void stage_constraint(CSpan<T>, CSpan<T> u, PSpan, MSpan<T> r) const {
    for (int i = 0; i < 3; ++i) r[i] = u[i];
  }
  template <class T> void terminal_constraint(CSpan<T>, PSpan, MSpan<T>) const {}
};

struct DoubleIntegrator {
  template <class T> void dynamics(CSpan<T> x, CSpan<T> u, PSpan, MSpan<T> xdot) const {
    xdot[0] = x[1];
    xdot[1] = u[0];
  }
  template <class T> void stage_residual(CSpan<T> x, CSpan<T> u, PSpan, MSpan<T> h) const {
    h[0] = x[0];
    h[1] = x[1];
    h[2] = u[0];
  }
  template <class T> void terminal_residual(CSpan<T> x, PSpan, MSpan<T> h) const {
    h[0] = x[0];
    h[1] = x[1];
  }
  template <class T> void stage_constraint(CSpan<T>, CSpan<T>, PSpan, MSpan<T>) const {}
  template <class T> void terminal_constraint(CSpan<T>, PSpan, MSpan<T>) const {}
};

Vec diag_vec(std::initializer_list<double> v) {
  Vec d(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) d[i++] = x;
  return d;
}

} // namespace

OcpProblem make_pendulum_problem(const PendulumParams &params, int N, double Ts) {
  OcpProblem pb;
  pb.name = "pendulum";
  pb.dims = Dims{4, 1, 5, 4, 1, 0, N, Ts, 4};
  pb.model = wrap_model(PendulumModel{params});
  pb.W = diag_vec({10.0, 10.0, 0.1, 0.1, 0.01}).asDiagonal();
  pb.WN = diag_vec({10.0, 10.0, 0.1, 0.1}).asDiagonal();
  pb.lb = Vec::Constant(1, -params.force_limit);
  pb.ub = Vec::Constant(1, params.force_limit);
  pb.lbN = Vec(0);
  pb.ubN = Vec(0);
  pb.default_params = Vec::Zero(4);
  pb.validate();
  return pb;
}

OcpProblem make_chain_problem(const ChainParams &params, int N, double Ts) {
  if (params.masses < 1) throw ConfigError("chain benchmark needs at least one free mass");
  const int M = params.masses;
  const int nx = 6 * M + 3;
  OcpProblem pb;
  pb.name = params.linear ? "chain_linear" : "chain_nonlinear";
  pb.dims = Dims{nx, 3, 3 + 3 * M + 3, 3 + 3 * M, 3, 0, N, Ts, 3};
  pb.model = wrap_model(ChainModel{params});
  Vec w(pb.dims.nr);
  w.head(3).setConstant(25.0);
  w.segment(3, 3 * M).setConstant(1.0);
  w.tail(3).setConstant(0.01);
  pb.W = w.asDiagonal();
  pb.WN = w.head(pb.dims.nrN).asDiagonal();
  pb.lb = Vec::Constant(3, -params.velocity_limit);
  pb.ub = Vec::Constant(3, params.velocity_limit);
  pb.lbN = Vec(0);
  pb.ubN = Vec(0);
  pb.default_params = Vec::Zero(3);
  pb.default_params[0] = 1.0;
  pb.validate();
  return pb;
}

OcpProblem make_lqr_problem(int N, double Ts) {
  OcpProblem pb;
  pb.name = "lqr";
  pb.dims = Dims{2, 1, 3, 2, 0, 0, N, Ts, 0};
  pb.model = wrap_model(DoubleIntegrator{});
  pb.W = diag_vec({1.0, 1.0, 0.1}).asDiagonal();
  pb.WN = Mat::Identity(2, 2);
  pb.lb = Vec(0);
  pb.ub = Vec(0);
  pb.lbN = Vec(0);
  pb.ubN = Vec(0);
  pb.default_params = Vec(0);
  pb.validate();
  return pb;
}

Vec chain_rest_state(const OcpProblem &chain, const Vec &end_position) {
  const int nx = chain.dims.nx;
  const int M = (nx - 3) / 6;
  const int np = 3 * M;
  Vec x = Vec::Zero(nx);
  x.tail(3) = end_position;
  for (int j = 0; j < M; ++j) x.segment(3 * j, 3) = end_position * (j + 1.0) / (M + 1.0);
  const Vec u = Vec::Zero(3);
  const Vec p = chain.default_params;

  auto accel = [&](const Vec &xs) { return Vec(eval_dynamics(chain, xs, u, p).segment(np, np)); };
  Vec res = accel(x);
  for (int it = 0; it < 100 && res.norm() > 1e-13; ++it) {
    const DynamicsJacobian jac = jac_dynamics(chain, x, u, p);
    const Mat K = jac.fx.block(np, 0, np, np);
    const Vec step = K.fullPivLu().solve(-res);
    double t = 1.0;
    for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
      Vec trial = x;
      trial.head(np) += t * step;
      const Vec r = accel(trial);
      if (r.norm() < res.norm()) {
        x = trial;
        res = r;
        break;
      }
    }
  }
  if (!(res.norm() <= 1e-8)) throw ConfigError("chain rest configuration did not converge");
  return x;
}

std::vector<std::string> benchmark_names() { return {"pendulum", "chain_linear", "chain_nonlinear", "lqr"}; }

Benchmark make_benchmark(const std::string &name, const BenchmarkOptions &options) {
  Benchmark b;
  if (name == "pendulum") {
    b.problem = make_pendulum_problem({}, options.N > 0 ? options.N : 40, options.Ts > 0.0 ? options.Ts : 0.05);
    b.x_init = Vec::Zero(4);
    b.x_init[1] = std::numbers::pi;
    b.u_init = Vec::Zero(1);
    b.reference = [](double) { return Vec(Vec::Zero(4)); };
    b.description = "cart-pole swing-up from the hanging position, |F| <= 20 N";
    return b;
  }
  if (name == "chain_linear" || name == "chain_nonlinear") {
    ChainParams prm;
    prm.masses = options.masses;
    prm.linear = name == "chain_linear";
    b.problem = make_chain_problem(prm, options.N > 0 ? options.N : 50, options.Ts > 0.0 ? options.Ts : 0.1);
    Vec start(3);
    start << 1.0, 0.0, 0.0;
    b.x_init = chain_rest_state(b.problem, start);
    b.u_init = Vec::Zero(3);
    Vec target(3);
    target << 0.8, 0.3, 0.2;
    b.reference = [target](double) { return target; };
    b.description = std::string(prm.linear ? "linear" : "nonlinear") +
                    " chain of masses moved from rest to a new end position, |v_end| <= 1";
    return b;
  }
  if (name == "lqr") {
    b.problem = make_lqr_problem(options.N > 0 ? options.N : 20, options.Ts > 0.0 ? options.Ts : 0.1);
    b.x_init = Vec::Zero(2);
    b.x_init[0] = 1.0;
    b.u_init = Vec::Zero(1);
    b.reference = [](double) { return Vec(0); };
    b.description = "unconstrained double integrator regulated to the origin";
    return b;
  }
  throw ConfigError("unknown benchmark '" + name + "'");
}

std::vector<Vec> reference_series(const Benchmark &bench, int samples) {
  std::vector<Vec> refs;
  refs.reserve(static_cast<std::size_t>(samples));
  for (int k = 0; k < samples; ++k) refs.push_back(bench.reference(k * bench.problem.dims.Ts));
  return refs;
}

} // namespace rtnmpc
