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

#include "rtnmpc/shooting.hpp"

#include <cmath>
#include <sstream>

#include "rtnmpc/errors.hpp"
#include "rtnmpc/parallel.hpp"

namespace rtnmpc {

namespace {

std::size_t idx(int k) { return static_cast<std::size_t>(k); }

void expect_count(std::size_t have, int want, const char *what) {
  if (static_cast<int>(have) != want) {
    std::ostringstream os;
    os << "trajectory " << what << " has " << have << " nodes, expected " << want;
    throw ConfigError(os.str());
  }
}

struct StageMeasure {
  double kappa = std::nan("");
  double kappa_tilde = std::nan("");
};

Vec stacked_increment(const Trajectory &prev, const Trajectory &cur, int k) {
  Vec q(cur.x[idx(k)].size() + cur.u[idx(k)].size());
  q << cur.x[idx(k)] - prev.x[idx(k)], cur.u[idx(k)] - prev.u[idx(k)];
  return q;
}

StageMeasure stage_measure(const Trajectory &prev_traj, const Trajectory &cur_traj, const StageQpData &prev, int k,
                           const Vec &cur_phi, const Vec *cur_directional, double eps_den) {
  StageMeasure m;
  const Vec dx = cur_traj.x[idx(k)] - prev_traj.x[idx(k)];
  const Vec du = cur_traj.u[idx(k)] - prev_traj.u[idx(k)];
  const Vec lin = prev.A[idx(k)] * dx + prev.B[idx(k)] * du;
  const double den = lin.norm();
  if (den >= eps_den) {
    m.kappa = (cur_phi - prev.phi[idx(k)] - lin).norm() / den;
  }
  if (cur_directional != nullptr && !prev_traj.lambda.empty() && !cur_traj.lambda.empty()) {
    const Vec dlam = cur_traj.lambda[idx(k + 1)] - prev_traj.lambda[idx(k + 1)];
    const double den_dual = std::abs(dlam.dot(lin));
    if (den_dual >= eps_den) {
      m.kappa_tilde = std::abs(dlam.dot(*cur_directional - lin)) / den_dual;
    }
  }
  return m;
}

} // namespace

Trajectory Trajectory::zeros(const Dims &dims) { return constant(dims, Vec::Zero(dims.nx), Vec::Zero(dims.nu)); }

Trajectory Trajectory::constant(const Dims &dims, const Vec &x, const Vec &u) {
  Trajectory t;
  t.x.assign(idx(dims.N + 1), x);
  t.u.assign(idx(dims.N), u);
  t.lambda.assign(idx(dims.N + 1), Vec::Zero(dims.nx));
  t.mu.assign(idx(dims.N), Vec::Zero(dims.nc));
  t.mu.push_back(Vec::Zero(dims.ncN));
  return t;
}

void Trajectory::validate(const Dims &dims) const {
  expect_count(x.size(), dims.N + 1, "x");
  expect_count(u.size(), dims.N, "u");
  expect_count(lambda.size(), dims.N + 1, "lambda");
  expect_count(mu.size(), dims.N + 1, "mu");
  for (int k = 0; k <= dims.N; ++k) {
    if (x[idx(k)].size() != dims.nx || lambda[idx(k)].size() != dims.nx) {
      throw ConfigError("trajectory state/multiplier size does not match nx");
    }
    if (!x[idx(k)].allFinite()) throw ConfigError("trajectory contains non-finite states");
    const int rows = k < dims.N ? dims.nc : dims.ncN;
    if (mu[idx(k)].size() != rows) throw ConfigError("trajectory path multiplier size mismatch");
  }
  for (int k = 0; k < dims.N; ++k) {
    if (u[idx(k)].size() != dims.nu) throw ConfigError("trajectory input size does not match nu");
    if (!u[idx(k)].allFinite()) throw ConfigError("trajectory contains non-finite inputs");
  }
}

int StageQpData::total_rows() const {
  int rows = 0;
  for (const auto &v : clb) rows += static_cast<int>(v.size());
  return rows;
}

void CmonConfig::validate() const {
  if (!(eta_pri >= 0.0) || !(eta_dual >= 0.0)) throw ConfigError("cmon thresholds must be non-negative");
  if (!(eps_den > 0.0)) throw ConfigError("cmon.eps_den must be positive");
}

std::pair<double, double> cmon_thresholds_from_tolerances(double /*eps_abs*/, double eps_rel) {
  return {eps_rel, eps_rel};
}

double CmonFlags::update_fraction() const {
  if (update_mask.empty()) return 1.0;
  int updated = 0;
  for (char m : update_mask) updated += m ? 1 : 0;
  return static_cast<double>(updated) / static_cast<double>(update_mask.size());
}

namespace {

template <class T> void shift_front(std::vector<T> &v, std::size_t count) {
  if (count < 2) return;
  for (std::size_t k = 0; k + 1 < count; ++k) v[k] = v[k + 1];
}

} // namespace

void shift_linearization(LinearizationMemory &memory) {
  StageQpData &qp = memory.data;
  const auto n = idx(qp.N);
  shift_front(qp.H, n);
  shift_front(qp.g, n);
  shift_front(qp.A, n);
  shift_front(qp.B, n);
  shift_front(qp.d, n);
  shift_front(qp.phi, n);
  shift_front(qp.C, n);
  shift_front(qp.D, n);
  shift_front(qp.clb, n);
  shift_front(qp.cub, n);
  Trajectory &t = memory.traj;
  shift_front(t.x, n + 1);
  shift_front(t.u, n);
  shift_front(t.lambda, n + 1);
  shift_front(t.mu, n);
}

CmonMeasures cmon_measures(const Trajectory &prev_traj, const Trajectory &cur_traj, const StageQpData &prev_data,
                           const std::vector<Vec> &cur_phi, const std::vector<Vec> &cur_directional,
                           double eps_den) {
  const int N = static_cast<int>(cur_phi.size());
  CmonMeasures out{Vec::Constant(N, std::nan("")), Vec::Constant(N, std::nan(""))};
  for (int k = 0; k < N; ++k) {
    const Vec *dir = cur_directional.empty() ? nullptr : &cur_directional[idx(k)];
    const StageMeasure m = stage_measure(prev_traj, cur_traj, prev_data, k, cur_phi[idx(k)], dir, eps_den);
    out.kappa[k] = m.kappa;
    out.kappa_tilde[k] = m.kappa_tilde;
  }
  return out;
}

GeneratedQp generate_qp(const OcpProblem &problem, const IntegratorConfig &integrator, const Trajectory &traj,
                        const Vec &x0_hat, const Vec &p, const LinearizationMemory *prev, const CmonConfig &cmon,
                        int threads) {
  const Dims &dims = problem.dims;
  traj.validate(dims);
  if (x0_hat.size() != dims.nx) throw ConfigError("initial state estimate has wrong length");
  const int N = dims.N;
  const int nx = dims.nx;
  const int nu = dims.nu;
  const bool cmon_active = cmon.enabled && prev != nullptr && cmon.eta_pri > 0.0;
  const bool dual_test = cmon_active && std::isfinite(cmon.eta_dual);
  if (cmon_active && (prev->data.N != N || prev->data.nx != nx || prev->data.nu != nu)) {
    throw ConfigError("previous linearization does not match problem dimensions");
  }

  GeneratedQp out;
  StageQpData &qp = out.data;
  qp.N = N;
  qp.nx = nx;
  qp.nu = nu;
  qp.H.resize(idx(N + 1));
  qp.g.resize(idx(N + 1));
  qp.A.resize(idx(N));
  qp.B.resize(idx(N));
  qp.d.resize(idx(N));
  qp.phi.resize(idx(N));
  qp.C.resize(idx(N + 1));
  qp.D.resize(idx(N));
  qp.clb.resize(idx(N + 1));
  qp.cub.resize(idx(N + 1));
  out.flags.update_mask.assign(idx(N), 1);
  out.flags.kappa = Vec::Constant(N, std::nan(""));
  out.flags.kappa_tilde = Vec::Constant(N, std::nan(""));
  std::vector<double> stage_cost(idx(N + 1), 0.0);

  parallel_for(N + 1, threads, [&](int k) {
    const Vec &xk = traj.x[idx(k)];
    if (k == N) {
      const ResidualEval res = eval_residual_and_jac(problem, xk, Vec(), p, true);
      const Vec Wh = problem.WN * res.h;
      stage_cost[idx(k)] = 0.5 * res.h.dot(Wh);
      Mat H = res.J.transpose() * problem.WN * res.J;
      qp.H[idx(k)] = 0.5 * (H + H.transpose());
      qp.g[idx(k)] = res.J.transpose() * Wh;
      ConstraintEval con = eval_constraint_and_jac(problem, xk, Vec(), p, true);
      qp.C[idx(k)] = std::move(con.C);
      qp.clb[idx(k)] = problem.lbN - con.r;
      qp.cub[idx(k)] = problem.ubN - con.r;
      return;
    }

    const Vec &uk = traj.u[idx(k)];
    try {
      bool update = true;
      if (cmon_active) {
        StepResult plain = simulate_interval(problem, integrator, xk, uk, p, false);
        Vec directional;
        const Vec *dir = nullptr;
        if (dual_test) {
          const Vec q = stacked_increment(prev->traj, traj, k);
          const double qn = q.norm();
          if (qn > 0.0) {
            Vec w(nx + nu);
            w << xk, uk;
            const double eps = 1e-7 * (1.0 + w.norm()) / qn;
            const StepResult shifted = simulate_interval(problem, integrator, xk + eps * q.head(nx),
                                                         uk + eps * q.tail(nu), p, false);
            directional = (shifted.x_next - plain.x_next) / eps;
            dir = &directional;
          }
        }
        const StageMeasure m = stage_measure(prev->traj, traj, prev->data, k, plain.x_next, dir, cmon.eps_den);
        out.flags.kappa[k] = m.kappa;
        out.flags.kappa_tilde[k] = m.kappa_tilde;
        const bool primal_ok = std::isfinite(m.kappa) && m.kappa <= cmon.eta_pri;
        const bool dual_ok = !dual_test || (std::isfinite(m.kappa_tilde) && m.kappa_tilde <= cmon.eta_dual);
        if (primal_ok && dual_ok) {
          update = false;
          qp.A[idx(k)] = prev->data.A[idx(k)];
          qp.B[idx(k)] = prev->data.B[idx(k)];
          qp.phi[idx(k)] = std::move(plain.x_next);
        }
      }
      if (update) {
        StepResult sim = simulate_interval(problem, integrator, xk, uk, p, true);
        qp.A[idx(k)] = std::move(sim.A);
        qp.B[idx(k)] = std::move(sim.B);
        qp.phi[idx(k)] = std::move(sim.x_next);
      }
      out.flags.update_mask[idx(k)] = update ? 1 : 0;
    } catch (const IntegrationError &e) {
      std::ostringstream os;
      os << "integration failed on shooting interval " << k << ": " << e.what();
      throw GenerationError(os.str(), k);
    }
    qp.d[idx(k)] = qp.phi[idx(k)] - traj.x[idx(k + 1)];

    const Mat &W = problem.weight(k);
    const ResidualEval res = eval_residual_and_jac(problem, xk, uk, p, false);
    const Vec Wh = W * res.h;
    stage_cost[idx(k)] = 0.5 * res.h.dot(Wh);
    Mat H = res.J.transpose() * W * res.J;
    qp.H[idx(k)] = 0.5 * (H + H.transpose());
    qp.g[idx(k)] = res.J.transpose() * Wh;

    ConstraintEval con = eval_constraint_and_jac(problem, xk, uk, p, false);
    qp.C[idx(k)] = std::move(con.C);
    qp.D[idx(k)] = std::move(con.D);
    qp.clb[idx(k)] = problem.lb - con.r;
    qp.cub[idx(k)] = problem.ub - con.r;
  });

  qp.dx0 = x0_hat - traj.x[0];
  qp.objective = 0.0;
  for (double c : stage_cost) qp.objective += c;
  return out;
}

} // namespace rtnmpc
