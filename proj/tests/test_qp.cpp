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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "rtnmpc/condensing.hpp"
#include "rtnmpc/errors.hpp"
#include "rtnmpc/qp.hpp"
#include "support/oracles.hpp"

using namespace rtnmpc;
using namespace rtnmpc::testing;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double max_abs(const Vec &v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

void expect_certified(const DenseQpInstance &qp, const QpSolution &sol, double tol) {
  const KktTriple t = dense_kkt(qp, sol.primal, sol.row_duals());
  EXPECT_LE(t.stationarity, tol);
  EXPECT_LE(t.feasibility, tol);
  EXPECT_LE(t.complementarity, tol);
}

} // namespace

TEST(QpDense, UnconstrainedNewtonStep) {
  const Mat H = Mat::Identity(2, 2);
  const Vec g = (Vec(2) << 1.0, -2.0).finished();
  const QpSolution s = solve_dense(H, g, Mat(0, 2), Vec(0), Vec(0));
  ASSERT_EQ(s.status, QpStatus::Optimal);
  EXPECT_NEAR(s.primal[0], -1.0, 1e-12);
  EXPECT_NEAR(s.primal[1], 2.0, 1e-12);
}

TEST(QpDense, ScalarLowerBoundActive) {
  const QpSolution s = solve_dense(Mat::Constant(1, 1, 1.0), Vec::Constant(1, 2.0), Mat::Identity(1, 1),
                                   Vec::Constant(1, -0.5), Vec::Constant(1, 0.5));
  ASSERT_EQ(s.status, QpStatus::Optimal);
  EXPECT_NEAR(s.primal[0], -0.5, 1e-8);
  EXPECT_NEAR(s.dual_lower[0], 1.5, 1e-7);
  EXPECT_EQ(s.dual_upper[0], 0.0);
}

TEST(QpDense, MatchesActiveSetEnumeration) {
  Rng rng(42);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + trial % 6;
    const int rows = trial % 4;
    const DenseQpInstance qp = random_dense_qp(rng, n, rows);
    const OracleSolution ref = enumerate_active_sets(qp);
    ASSERT_TRUE(ref.ok);
    const QpSolution s = solve_dense(qp.H, qp.g, qp.C, qp.lb, qp.ub);
    ASSERT_EQ(s.status, QpStatus::Optimal) << trial;
    EXPECT_LE(max_abs(s.primal - ref.x), 1e-6) << trial;
    EXPECT_LE(max_abs(s.row_duals() - ref.y), 1e-6) << trial;
    expect_certified(qp, s, 1e-8);
  }
}

TEST(QpDense, DualPairsAreComplementary) {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const DenseQpInstance qp = random_dense_qp(rng, 4, 3);
    const QpSolution s = solve_dense(qp.H, qp.g, qp.C, qp.lb, qp.ub);
    ASSERT_EQ(s.status, QpStatus::Optimal);
    for (int i = 0; i < 3; ++i) {
      EXPECT_GE(s.dual_lower[i], 0.0);
      EXPECT_GE(s.dual_upper[i], 0.0);
      EXPECT_EQ(s.dual_lower[i] * s.dual_upper[i], 0.0);
    }
  }
}

TEST(QpDense, BarrierDecreasesMonotonically) {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const DenseQpInstance qp = random_dense_qp(rng, 5, 3);
    const QpSolution s = solve_dense(qp.H, qp.g, qp.C, qp.lb, qp.ub);
    for (std::size_t i = 1; i < s.barrier_history.size(); ++i) {
      EXPECT_LE(s.barrier_history[i], s.barrier_history[i - 1]);
    }
  }
}

TEST(QpDense, InfiniteBoundsCarryNoDual) {
  const Mat H = Mat::Identity(2, 2);
  const Vec g = (Vec(2) << -3.0, 1.0).finished();
  Mat C = Mat::Identity(2, 2);
  const Vec lb = (Vec(2) << -kInf, -kInf).finished();
  const Vec ub = (Vec(2) << 1.0, kInf).finished();
  const QpSolution s = solve_dense(H, g, C, lb, ub);
  ASSERT_EQ(s.status, QpStatus::Optimal);
  EXPECT_NEAR(s.primal[0], 1.0, 1e-8);
  EXPECT_NEAR(s.primal[1], -1.0, 1e-8);
  EXPECT_NEAR(s.dual_upper[0], 2.0, 1e-7);
  EXPECT_EQ(s.dual_lower[1], 0.0);
  EXPECT_EQ(s.dual_upper[1], 0.0);
}

TEST(QpDense, SemidefiniteHessianIsRegularized) {
  const Mat H = Mat::Zero(1, 1);
  const QpSolution s = solve_dense(H, Vec::Constant(1, 1.0), Mat::Identity(1, 1), Vec::Constant(1, -2.0),
                                   Vec::Constant(1, 2.0));
  ASSERT_EQ(s.status, QpStatus::Optimal);
  EXPECT_NEAR(s.primal[0], -2.0, 1e-6);
}

TEST(QpDense, CrossedBoundsAreInfeasible) {
  const QpSolution s = solve_dense(Mat::Identity(1, 1), Vec::Zero(1), Mat::Identity(1, 1), Vec::Constant(1, 1.0),
                                   Vec::Constant(1, -1.0));
  EXPECT_EQ(s.status, QpStatus::Infeasible);
}

TEST(QpDense, InconsistentRowsAreInfeasible) {
  // x >= 1 and x <= -1 through two different rows
  Mat C(2, 1);
  C << 1.0, 1.0;
  const Vec lb = (Vec(2) << 1.0, -kInf).finished();
  const Vec ub = (Vec(2) << kInf, -1.0).finished();
  const QpSolution s = solve_dense(Mat::Identity(1, 1), Vec::Zero(1), C, lb, ub);
  EXPECT_NE(s.status, QpStatus::Optimal);
}

TEST(QpDense, IterationLimitReported) {
  Rng rng(3);
  const DenseQpInstance qp = random_dense_qp(rng, 6, 3);
  QpSolverConfig cfg;
  cfg.max_iters = 1;
  const QpSolution s = solve_dense(qp.H, qp.g, qp.C, qp.lb, qp.ub, cfg);
  EXPECT_EQ(s.status, QpStatus::MaxIters);
  EXPECT_EQ(s.iters, 1);
}

TEST(QpDense, ConfigValidation) {
  QpSolverConfig cfg;
  cfg.tol = 0.0;
  EXPECT_THROW(solve_dense(Mat::Identity(1, 1), Vec::Zero(1), Mat(0, 1), Vec(0), Vec(0), cfg), ConfigError);
  EXPECT_THROW(solve_dense(Mat::Identity(2, 2), Vec::Zero(1), Mat(0, 2), Vec(0), Vec(0)), ConfigError);
}

TEST(QpSparse, AgreesWithDensePath) {
  Rng rng(11);
  for (int trial = 0; trial < 15; ++trial) {
    const int N = 2 + trial, nx = 1 + trial % 4, nu = 1 + trial % 2;
    const StageQpInstance inst = random_stage_qp(rng, N, nx, nu, trial % 3, trial % 2);
    const QpSolution d = solve_condensed(inst.qp, inst.dx0);
    const QpSolution s = solve_sparse(inst.qp, inst.dx0);
    ASSERT_EQ(d.status, QpStatus::Optimal);
    ASSERT_EQ(s.status, QpStatus::Optimal);
    for (int k = 0; k <= N; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      EXPECT_LE(max_abs(d.step.dx[kk] - s.step.dx[kk]), 1e-6);
      EXPECT_LE(max_abs(d.step.lambda[kk] - s.step.lambda[kk]), 1e-6);
      EXPECT_LE(max_abs(d.step.mu[kk] - s.step.mu[kk]), 1e-6);
      if (k < N) EXPECT_LE(max_abs(d.step.du[kk] - s.step.du[kk]), 1e-6);
    }
  }
}

TEST(QpSparse, UnconstrainedMatchesRiccatiLqr) {
  Rng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const StageQpInstance inst = random_stage_qp(rng, 3 + 2 * trial, 2 + trial % 4, 1 + trial % 3, 0, 0);
    const LqrSolution ref = lqr_riccati(inst.qp, inst.dx0);
    const QpSolution s = solve_sparse(inst.qp, inst.dx0);
    ASSERT_EQ(s.status, QpStatus::Optimal);
    for (std::size_t k = 0; k < ref.dx.size(); ++k) {
      EXPECT_LE(max_abs(s.step.dx[k] - ref.dx[k]), 1e-8);
      EXPECT_LE(max_abs(s.step.lambda[k] - ref.lambda[k]), 1e-8);
      if (k < ref.du.size()) EXPECT_LE(max_abs(s.step.du[k] - ref.du[k]), 1e-8);
    }
  }
}

TEST(QpSparse, OriginIsOptimalImmediately) {
  Rng rng(13);
  StageQpInstance inst = random_stage_qp(rng, 6, 3, 2, 2, 1);
  for (auto &d : inst.qp.d) d.setZero();
  for (auto &g : inst.qp.g) g.setZero();
  for (auto &l : inst.qp.clb) l = -l.cwiseAbs() - Vec::Ones(l.size());
  for (auto &u : inst.qp.cub) u = u.cwiseAbs() + Vec::Ones(u.size());
  const QpSolution s = solve_sparse(inst.qp, Vec::Zero(3));
  ASSERT_EQ(s.status, QpStatus::Optimal);
  EXPECT_LE(s.iters, 2);
  EXPECT_LE(max_abs(s.primal), 1e-8);
}

TEST(QpSparse, CertificateHoldsOnStageForm) {
  Rng rng(14);
  const StageQpInstance inst = random_stage_qp(rng, 10, 4, 2, 2, 2);
  const QpSolution s = solve_sparse(inst.qp, inst.dx0);
  ASSERT_EQ(s.status, QpStatus::Optimal);
  const OracleSolution ref = stage_active_set(inst);
  ASSERT_TRUE(ref.ok);
  for (int k = 0; k <= 10; ++k) {
    EXPECT_LE(max_abs(s.step.dx[static_cast<std::size_t>(k)] - ref.x.segment(k * 6, 4)), 1e-6);
  }
  EXPECT_LE(s.kkt_residual, 1e-8);
}
