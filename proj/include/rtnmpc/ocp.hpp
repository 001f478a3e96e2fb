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

#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rtnmpc/tangent.hpp"

namespace rtnmpc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Directions propagated per forward sweep; wider Jacobians use several sweeps.
inline constexpr int kAdChunk = 8;
using AdScalar = Tangent<kAdChunk>;

struct Dims {
  int nx = 0;   // states
  int nu = 0;   // inputs
  int nr = 0;   // stage residual length
  int nrN = 0;  // terminal residual length
  int nc = 0;   // stage path constraints
  int ncN = 0;  // terminal constraints
  int N = 1;    // shooting intervals
  double Ts = 0.1;
  int np = 0;   // online parameters

  void validate() const;
};

/// Type-erased model: every function exists for double and for AdScalar.
class ModelFunctions {
public:
  virtual ~ModelFunctions() = default;

  template <class T> using In = std::span<const T>;
  template <class T> using Out = std::span<T>;
  using P = std::span<const double>;

  virtual void dynamics(In<double> x, In<double> u, P p, Out<double> xdot) const = 0;
  virtual void dynamics(In<AdScalar> x, In<AdScalar> u, P p, Out<AdScalar> xdot) const = 0;
  virtual void stage_residual(In<double> x, In<double> u, P p, Out<double> h) const = 0;
  virtual void stage_residual(In<AdScalar> x, In<AdScalar> u, P p, Out<AdScalar> h) const = 0;
  virtual void terminal_residual(In<double> x, P p, Out<double> h) const = 0;
  virtual void terminal_residual(In<AdScalar> x, P p, Out<AdScalar> h) const = 0;
  virtual void stage_constraint(In<double> x, In<double> u, P p, Out<double> r) const = 0;
  virtual void stage_constraint(In<AdScalar> x, In<AdScalar> u, P p, Out<AdScalar> r) const = 0;
  virtual void terminal_constraint(In<double> x, P p, Out<double> r) const = 0;
  virtual void terminal_constraint(In<AdScalar> x, P p, Out<AdScalar> r) const = 0;
};

/// Wraps a model written against a generic scalar type. `M` provides
///
///   template <class T> void dynamics(std::span<const T> x, std::span<const T> u,
///                                    std::span<const double> p, std::span<T> xdot) const;
///
/// and likewise stage_residual, terminal_residual (no u), stage_constraint and
/// terminal_constraint (no u).
template <class M> class ModelAdapter final : public ModelFunctions {
public:
  explicit ModelAdapter(M model) : model_(std::move(model)) {}

  void dynamics(In<double> x, In<double> u, P p, Out<double> o) const override { model_.dynamics(x, u, p, o); }
  void dynamics(In<AdScalar> x, In<AdScalar> u, P p, Out<AdScalar> o) const override { model_.dynamics(x, u, p, o); }
  void stage_residual(In<double> x, In<double> u, P p, Out<double> o) const override { model_.stage_residual(x, u, p, o); }
  void stage_residual(In<AdScalar> x, In<AdScalar> u, P p, Out<AdScalar> o) const override {
    model_.stage_residual(x, u, p, o);
  }
  void terminal_residual(In<double> x, P p, Out<double> o) const override { model_.terminal_residual(x, p, o); }
  void terminal_residual(In<AdScalar> x, P p, Out<AdScalar> o) const override { model_.terminal_residual(x, p, o); }
  void stage_constraint(In<double> x, In<double> u, P p, Out<double> o) const override { model_.stage_constraint(x, u, p, o); }
  void stage_constraint(In<AdScalar> x, In<AdScalar> u, P p, Out<AdScalar> o) const override {
    model_.stage_constraint(x, u, p, o);
  }
  void terminal_constraint(In<double> x, P p, Out<double> o) const override { model_.terminal_constraint(x, p, o); }
  void terminal_constraint(In<AdScalar> x, P p, Out<AdScalar> o) const override { model_.terminal_constraint(x, p, o); }

  const M &model() const { return model_; }

private:
  M model_;
};

template <class M> std::shared_ptr<const ModelFunctions> wrap_model(M model) {
  return std::make_shared<const ModelAdapter<M>>(std::move(model));
}

/// Continuous-time least-squares OCP. Immutable once validated; share freely.
struct OcpProblem {
  std::string name;
  Dims dims;
  std::shared_ptr<const ModelFunctions> model;
  Mat W;                         // nr x nr, stages 0..N-1
  Mat WN;                        // nrN x nrN
  std::vector<Mat> stage_W;      // optional per-stage override (empty or size N)
  Vec lb, ub;                    // stage constraint bounds, size nc
  Vec lbN, ubN;                  // terminal constraint bounds, size ncN
  Vec default_params;            // size np

  const Mat &weight(int k) const { return stage_W.empty() ? W : stage_W[static_cast<std::size_t>(k)]; }

  /// Throws ConfigError on inconsistent sizes, non-PSD weights or crossed bounds.
  void validate() const;
};

struct DynamicsJacobian {
  Vec f;
  Mat fx; // nx x nx
  Mat fu; // nx x nu
};

struct ResidualEval {
  Vec h;
  Mat J; // nr x (nx+nu), or nrN x nx for the terminal residual
};

struct ConstraintEval {
  Vec r;
  Mat C; // w.r.t. x
  Mat D; // w.r.t. u, empty for the terminal constraint
};

Vec eval_dynamics(const OcpProblem &problem, const Vec &x, const Vec &u, const Vec &p);
DynamicsJacobian jac_dynamics(const OcpProblem &problem, const Vec &x, const Vec &u, const Vec &p);

Vec eval_residual(const OcpProblem &problem, const Vec &x, const Vec &u, const Vec &p, bool terminal);
ResidualEval eval_residual_and_jac(const OcpProblem &problem, const Vec &x, const Vec &u, const Vec &p,
                                   bool terminal);

Vec eval_constraint(const OcpProblem &problem, const Vec &x, const Vec &u, const Vec &p, bool terminal);
ConstraintEval eval_constraint_and_jac(const OcpProblem &problem, const Vec &x, const Vec &u, const Vec &p,
                                       bool terminal);

} // namespace rtnmpc
