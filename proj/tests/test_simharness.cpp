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

#include <sstream>

#include "rtnmpc/benchmarks.hpp"
#include "rtnmpc/errors.hpp"
#include "rtnmpc/integrator.hpp"
#include "rtnmpc/simharness.hpp"
#include "support/models.hpp"

using namespace rtnmpc;
using namespace rtnmpc::testing;

namespace {

double max_abs(const Vec &v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

SolverOptions rti_options() {
  SolverOptions o;
  o.sqp.mode = SqpMode::Rti;
  return o;
}

Trajectory random_traj(Rng &rng, const Dims &dims) {
  Trajectory t = Trajectory::zeros(dims);
  for (auto &x : t.x) x = random_vector(rng, dims.nx);
  for (auto &u : t.u) u = random_vector(rng, dims.nu);
  for (auto &l : t.lambda) l = random_vector(rng, dims.nx);
  for (auto &m : t.mu) m = random_vector(rng, static_cast<int>(m.size()));
  return t;
}

} // namespace

TEST(Shift, ConstantTrajectoryAtRestUnchanged) {
  const OcpProblem pb = make_lqr_problem();
  const Trajectory t = Trajectory::constant(pb.dims, Vec::Zero(2), Vec::Zero(1));
  const Trajectory s = shift_warm_start(pb, {}, t, pb.default_params);
  for (std::size_t k = 0; k < t.x.size(); ++k) EXPECT_EQ(s.x[k], t.x[k]);
  for (std::size_t k = 0; k < t.u.size(); ++k) EXPECT_EQ(s.u[k], t.u[k]);
}

TEST(Shift, FeasibleStaysFeasibleExceptLastInterval) {
  const OcpProblem pb = make_vdp_problem(8);
  Rng rng(2);
  Trajectory t = Trajectory::zeros(pb.dims);
  t.x[0] = random_vector(rng, 2);
  for (int k = 0; k < 8; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    t.u[kk] = random_vector(rng, 1, 0.5);
    t.x[kk + 1] = simulate_interval(pb, {}, t.x[kk], t.u[kk], Vec(0), false).x_next;
  }
  const Trajectory s = shift_warm_start(pb, {}, t, Vec(0));
  for (int k = 0; k < 8; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    const Vec next = simulate_interval(pb, {}, s.x[kk], s.u[kk], Vec(0), false).x_next;
    EXPECT_LE(max_abs(next - s.x[kk + 1]), 1e-14) << k;
  }
  EXPECT_EQ(s.u[7], t.u[7]);
}

TEST(Shift, TwiceMatchesShiftByTwo) {
  const OcpProblem pb = make_vdp_problem(6);
  Rng rng(3);
  const Trajectory t = random_traj(rng, pb.dims);
  const Trajectory s = shift_warm_start(pb, {}, shift_warm_start(pb, {}, t, Vec(0)), Vec(0));
  for (int k = 0; k + 2 <= 6; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    EXPECT_EQ(s.x[kk], t.x[kk + 2]);
    EXPECT_EQ(s.lambda[kk], t.lambda[kk + 2]);
    if (k + 2 < 6) {
      EXPECT_EQ(s.u[kk], t.u[kk + 2]);
      EXPECT_EQ(s.mu[kk], t.mu[kk + 2]);
    }
  }
}

TEST(ClosedLoop, LinearPlantSettles) {
  const Benchmark b = make_benchmark("lqr");
  SimConfig sim;
  sim.t_end = 8.0;
  const int n = sim.samples(b.problem.dims.Ts);
  const SimLog log = run_closed_loop(b.problem, rti_options(), sim, b.x_init, reference_series(b, n));
  ASSERT_EQ(static_cast<int>(log.samples.size()), n);
  EXPECT_EQ(log.failures(), 0);
  EXPECT_LE(log.x_final.norm(), 1e-3);
  // monotone once the initial transient has passed
  for (int k = n / 4 + 1; k < n; ++k) {
    EXPECT_LE(log.samples[static_cast<std::size_t>(k)].x.norm(), log.samples[static_cast<std::size_t>(k - 1)].x.norm())
        << k;
  }
  for (int k = 1; k < n; ++k) EXPECT_GT(log.samples[static_cast<std::size_t>(k)].t, log.samples[static_cast<std::size_t>(k - 1)].t);
}

TEST(ClosedLoop, ShortReferenceRejectedBeforeSolving) {
  const Benchmark b = make_benchmark("lqr");
  SimConfig sim;
  std::vector<Vec> refs(3, b.reference(0.0));
  EXPECT_THROW(run_closed_loop(b.problem, rti_options(), sim, b.x_init, refs), ConfigError);
  EXPECT_THROW(run_closed_loop(b.problem, rti_options(), sim, b.x_init, {}), ConfigError);
}

TEST(ClosedLoop, InvalidConfigRejected) {
  SimConfig sim;
  sim.t_end = 0.0;
  EXPECT_THROW(sim.validate(), ConfigError);
  sim = SimConfig{};
  sim.plant_substeps = 0;
  EXPECT_THROW(sim.validate(), ConfigError);
  sim = SimConfig{};
  sim.noise_std = -1.0;
  EXPECT_THROW(sim.validate(), ConfigError);
  const Benchmark b = make_benchmark("lqr");
  Vec bad = b.x_init;
  bad[0] = std::nan("");
  EXPECT_THROW(run_closed_loop(b.problem, rti_options(), SimConfig{}, bad, reference_series(b, 50)), ConfigError);
}

TEST(ClosedLoop, FixedSeedIsBitIdentical) {
  const Benchmark b = make_benchmark("pendulum");
  SimConfig sim;
  sim.t_end = 1.0;
  sim.noise_std = 1e-3;
  sim.seed = 17;
  const auto refs = reference_series(b, sim.samples(b.problem.dims.Ts));
  const SimLog a = run_closed_loop(b.problem, rti_options(), sim, b.x_init, refs);
  const SimLog c = run_closed_loop(b.problem, rti_options(), sim, b.x_init, refs);
  std::ostringstream sa, sc;
  a.write_csv(sa);
  c.write_csv(sc);
  EXPECT_EQ(sa.str(), sc.str());
  EXPECT_EQ(a.x_final, c.x_final);
  sim.seed = 18;
  const SimLog d = run_closed_loop(b.problem, rti_options(), sim, b.x_init, refs);
  EXPECT_NE(d.x_final, a.x_final);
}

TEST(ClosedLoop, MatchingPlantPredictsExactly) {
  const Benchmark b = make_benchmark("pendulum");
  SolverOptions o = rti_options();
  SimConfig sim;
  sim.t_end = 1.0;
  sim.plant_scheme = o.integrator.scheme;
  sim.plant_substeps = o.integrator.steps_per_interval;
  const SimLog log =
      run_closed_loop(b.problem, o, sim, b.x_init, reference_series(b, sim.samples(b.problem.dims.Ts)));
  for (const auto &s : log.samples) EXPECT_LE(s.prediction_error, 1e-12) << s.k;
}

TEST(ClosedLoop, CmonFractionInRangeAndFullAtZeroThreshold) {
  const Benchmark b = make_benchmark("pendulum");
  SimConfig sim;
  sim.t_end = 1.0;
  const auto refs = reference_series(b, sim.samples(b.problem.dims.Ts));
  SolverOptions o = rti_options();
  o.cmon.enabled = true;
  o.cmon.eta_pri = 0.05;
  const SimLog on = run_closed_loop(b.problem, o, sim, b.x_init, refs);
  for (const auto &s : on.samples) {
    EXPECT_GE(s.cmon_fraction, 0.0);
    EXPECT_LE(s.cmon_fraction, 1.0);
  }
  o.cmon.eta_pri = 0.0;
  o.cmon.eta_dual = 0.0;
  const SimLog zero = run_closed_loop(b.problem, o, sim, b.x_init, refs);
  for (const auto &s : zero.samples) EXPECT_EQ(s.cmon_fraction, 1.0);
}

TEST(ClosedLoop, PlantMismatchThroughSeparateModel) {
  const Benchmark b = make_benchmark("pendulum");
  PendulumParams heavy;
  heavy.pole_mass = 0.12;
  SimConfig sim;
  sim.t_end = 1.0;
  sim.plant = std::make_shared<const OcpProblem>(make_pendulum_problem(heavy));
  const auto refs = reference_series(b, sim.samples(b.problem.dims.Ts));
  const SimLog nominal = run_closed_loop(b.problem, rti_options(), SimConfig{.t_end = 1.0}, b.x_init, refs);
  const SimLog perturbed = run_closed_loop(b.problem, rti_options(), sim, b.x_init, refs);
  EXPECT_GT(max_abs(nominal.x_final - perturbed.x_final), 0.0);
}

TEST(SimLogOutput, CsvAndSummaryShape) {
  const Benchmark b = make_benchmark("lqr");
  SimConfig sim;
  sim.t_end = 0.5;
  const int n = sim.samples(b.problem.dims.Ts);
  const SimLog log = run_closed_loop(b.problem, rti_options(), sim, b.x_init, reference_series(b, n));
  std::ostringstream os;
  log.write_csv(os);
  const std::string csv = os.str();
  EXPECT_EQ(static_cast<int>(std::count(csv.begin(), csv.end(), '\n')), n + 1);
  EXPECT_EQ(csv.find("time"), std::string::npos);
  const auto js = log.summary();
  EXPECT_EQ(js["samples"].get<int>(), n);
  EXPECT_GE(js["solve_time"]["max"].get<double>(), js["solve_time"]["mean"].get<double>());
  std::ostringstream solver;
  log.write_solver_csv(solver);
  EXPECT_NE(solver.str().find("update_fraction"), std::string::npos);
}
