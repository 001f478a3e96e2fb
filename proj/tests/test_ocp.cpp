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

#include "rtnmpc/benchmarks.hpp"
#include "rtnmpc/errors.hpp"
#include "rtnmpc/ocp.hpp"
#include "support/models.hpp"

using namespace rtnmpc;
using namespace rtnmpc::testing;

TEST(Tangent, ProductAndQuotientRules) {
  using T = Tangent<2>;
  const T x = T::variable(1.5, 0);
  const T y = T::variable(-0.7, 1);
  const T f = x * y / (x + 2.0);
  // d/dx [xy/(x+2)] = 2y/(x+2)^2, d/dy = x/(x+2)
  EXPECT_NEAR(f.value(), 1.5 * -0.7 / 3.5, 1e-15);
  EXPECT_NEAR(f.partial(0), 2.0 * -0.7 / (3.5 * 3.5), 1e-15);
  EXPECT_NEAR(f.partial(1), 1.5 / 3.5, 1e-15);
}

TEST(Tangent, ElementaryFunctions) {
  using T = Tangent<1>;
  const double v = 0.37;
  const T x = T::variable(v, 0);
  EXPECT_NEAR(sin(x).partial(0), std::cos(v), 1e-15);
  EXPECT_NEAR(cos(x).partial(0), -std::sin(v), 1e-15);
  EXPECT_NEAR(exp(x).partial(0), std::exp(v), 1e-15);
  EXPECT_NEAR(log(x).partial(0), 1.0 / v, 1e-14);
  EXPECT_NEAR(sqrt(x).partial(0), 0.5 / std::sqrt(v), 1e-14);
  EXPECT_NEAR(tanh(x).partial(0), 1.0 - std::tanh(v) * std::tanh(v), 1e-15);
  EXPECT_NEAR(atan(x).partial(0), 1.0 / (1.0 + v * v), 1e-15);
  EXPECT_NEAR(pow(x, 3.0).partial(0), 3.0 * v * v, 1e-14);
  EXPECT_NEAR(atan2(x, T(2.0)).partial(0), 2.0 / (4.0 + v * v), 1e-15);
}

TEST(OcpModel, DynamicsJacobianMatchesFiniteDifferences) {
  for (const auto &name : benchmark_names()) {
    const Benchmark b = make_benchmark(name);
    Rng rng(7);
    const Vec x = b.x_init + random_vector(rng, b.problem.dims.nx, 0.05);
    const Vec u = random_vector(rng, b.problem.dims.nu, 0.3);
    const Vec p = b.reference(0.0);
    const DynamicsJacobian jac = jac_dynamics(b.problem, x, u, p);
    Mat A, B;
    fd_sensitivities([&](const Vec &xx, const Vec &uu) { return eval_dynamics(b.problem, xx, uu, p); }, x, u, A, B);
    EXPECT_LE((jac.fx - A).cwiseAbs().maxCoeff(), 1e-6 * (1.0 + A.cwiseAbs().maxCoeff())) << name;
    EXPECT_LE((jac.fu - B).cwiseAbs().maxCoeff(), 1e-6 * (1.0 + B.cwiseAbs().maxCoeff())) << name;
    EXPECT_LE((jac.f - eval_dynamics(b.problem, x, u, p)).norm(), 0.0) << name;
  }
}

TEST(OcpModel, ResidualAndConstraintJacobians) {
  const OcpProblem pb = make_pendulum_problem();
  const Vec x = (Vec(4) << 0.1, 0.2, -0.3, 0.4).finished();
  const Vec u = Vec::Constant(1, 2.5);
  const Vec p = (Vec(4) << 1.0, 0.0, 0.0, 0.0).finished();
  const ResidualEval r = eval_residual_and_jac(pb, x, u, p, false);
  ASSERT_EQ(r.h.size(), 5);
  EXPECT_DOUBLE_EQ(r.h[0], -0.9);
  EXPECT_DOUBLE_EQ(r.h[4], 2.5);
  EXPECT_TRUE(r.J.isApprox(Mat::Identity(5, 5)));
  const ResidualEval rN = eval_residual_and_jac(pb, x, Vec(), p, true);
  EXPECT_TRUE(rN.J.isApprox(Mat::Identity(4, 4)));
  const ConstraintEval c = eval_constraint_and_jac(pb, x, u, p, false);
  EXPECT_DOUBLE_EQ(c.r[0], 2.5);
  EXPECT_TRUE(c.C.isZero());
  EXPECT_DOUBLE_EQ(c.D(0, 0), 1.0);
}

TEST(OcpModel, WideJacobianUsesSeveralChunks) {
  // nx + nu = 30 > kAdChunk
  const Benchmark b = make_benchmark("chain_nonlinear");
  ASSERT_GT(b.problem.dims.nx + b.problem.dims.nu, kAdChunk);
  const Vec u = (Vec(3) << 0.1, -0.2, 0.3).finished();
  const DynamicsJacobian jac = jac_dynamics(b.problem, b.x_init, u, b.reference(0));
  Mat A, B;
  fd_sensitivities([&](const Vec &xx, const Vec &uu) { return eval_dynamics(b.problem, xx, uu, b.reference(0)); },
                   b.x_init, u, A, B);
  EXPECT_LE((jac.fx - A).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LE((jac.fu - B).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(OcpModel, ValidateRejectsBadProblems) {
  OcpProblem pb = make_vdp_problem();
  EXPECT_NO_THROW(pb.validate());

  OcpProblem bad = pb;
  bad.W = Mat::Identity(2, 2);
  EXPECT_THROW(bad.validate(), ConfigError);

  bad = pb;
  bad.W(0, 0) = -1.0;
  EXPECT_THROW(bad.validate(), ConfigError);

  bad = pb;
  bad.W(0, 1) = 0.5;
  EXPECT_THROW(bad.validate(), ConfigError);

  bad = pb;
  bad.lb[0] = 2.0;
  EXPECT_THROW(bad.validate(), ConfigError);

  bad = pb;
  bad.dims.N = 0;
  EXPECT_THROW(bad.validate(), ConfigError);

  bad = pb;
  bad.model = nullptr;
  EXPECT_THROW(bad.validate(), ConfigError);

  bad = pb;
  bad.stage_W.assign(3, Mat::Identity(3, 3));
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(OcpModel, WrongInputLengthThrows) {
  const OcpProblem pb = make_vdp_problem();
  EXPECT_THROW(eval_dynamics(pb, Vec::Zero(3), Vec::Zero(1), Vec(0)), ConfigError);
  EXPECT_THROW(eval_dynamics(pb, Vec::Zero(2), Vec::Zero(2), Vec(0)), ConfigError);
}

TEST(OcpModel, PerStageWeights) {
  OcpProblem pb = make_vdp_problem(3);
  pb.stage_W = {Mat::Identity(3, 3), 2.0 * Mat::Identity(3, 3), 3.0 * Mat::Identity(3, 3)};
  EXPECT_NO_THROW(pb.validate());
  EXPECT_DOUBLE_EQ(pb.weight(2)(1, 1), 3.0);
}
