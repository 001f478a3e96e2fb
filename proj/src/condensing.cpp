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

#include "rtnmpc/condensing.hpp"

#include "rtnmpc/errors.hpp"

namespace rtnmpc {

namespace {

std::size_t idx(int k) { return static_cast<std::size_t>(k); }

void check_stage_data(const StageQpData &qp, const Vec &dx0) {
  const auto n = idx(qp.N);
  if (qp.H.size() != n + 1 || qp.g.size() != n + 1 || qp.A.size() != n || qp.B.size() != n ||
      qp.d.size() != n || qp.C.size() != n + 1 || qp.D.size() != n || qp.clb.size() != n + 1 ||
      qp.cub.size() != n + 1) {
    throw ConfigError("stage QP data is incomplete");
  }
  if (dx0.size() != qp.nx) throw ConfigError("initial increment has wrong length");
}

} // namespace

CondensedQp condense(const StageQpData &qp, const Vec &dx0) {
  check_stage_data(qp, dx0);
  const int N = qp.N;
  const int nx = qp.nx;
  const int nu = qp.nu;
  const int nz = nx + nu;

  CondensedQp c;
  c.N = N;
  c.nx = nx;
  c.nu = nu;
  c.G.setZero((N + 1) * nx, N * nu);
  c.e.setZero((N + 1) * nx);
  c.e.head(nx) = dx0;
  for (int k = 0; k < N; ++k) {
    const Mat &A = qp.A[idx(k)];
    c.G.block((k + 1) * nx, 0, nx, k * nu) = A * c.G.block(k * nx, 0, nx, k * nu);
    c.G.block((k + 1) * nx, k * nu, nx, nu) = qp.B[idx(k)];
    c.e.segment((k + 1) * nx, nx) = A * c.e.segment(k * nx, nx) + qp.d[idx(k)];
  }

  c.row_offsets.assign(idx(N + 2), 0);
  for (int k = 0; k <= N; ++k) c.row_offsets[idx(k + 1)] = c.row_offsets[idx(k)] + qp.stage_rows(k);
  const int rows = c.row_offsets.back();

  c.H.setZero(N * nu, N * nu);
  c.g.setZero(N * nu);
  c.C.setZero(rows, N * nu);
  c.lb.resize(rows);
  c.ub.resize(rows);

  Mat Z;
  Vec zaff(nz);
  for (int k = 0; k < N; ++k) {
    // z_k = Z du(0..k) + (e_k, 0); only the first k+1 input blocks influence stage k.
    const int cols = (k + 1) * nu;
    Z.setZero(nz, cols);
    Z.topRows(nx) = c.G.block(k * nx, 0, nx, cols);
    Z.bottomRightCorner(nu, nu).setIdentity();
    zaff.head(nx) = c.e.segment(k * nx, nx);
    zaff.tail(nu).setZero();

    const Mat HZ = qp.H[idx(k)] * Z;
    c.H.topLeftCorner(cols, cols).noalias() += Z.transpose() * HZ;
    c.g.head(cols).noalias() += Z.transpose() * (qp.H[idx(k)] * zaff + qp.g[idx(k)]);

    const int m = qp.stage_rows(k);
    if (m > 0) {
      Mat CD(m, nz);
      CD << qp.C[idx(k)], qp.D[idx(k)];
      const int r0 = c.row_offsets[idx(k)];
      c.C.block(r0, 0, m, cols) = CD * Z;
      const Vec shift = qp.C[idx(k)] * c.e.segment(k * nx, nx);
      c.lb.segment(r0, m) = qp.clb[idx(k)] - shift;
      c.ub.segment(r0, m) = qp.cub[idx(k)] - shift;
    }
  }
  {
    const Mat GN = c.G.bottomRows(nx);
    const Vec eN = c.e.tail(nx);
    c.H.noalias() += GN.transpose() * qp.H[idx(N)] * GN;
    c.g.noalias() += GN.transpose() * (qp.H[idx(N)] * eN + qp.g[idx(N)]);
    const int m = qp.stage_rows(N);
    if (m > 0) {
      const int r0 = c.row_offsets[idx(N)];
      c.C.block(r0, 0, m, N * nu) = qp.C[idx(N)] * GN;
      const Vec shift = qp.C[idx(N)] * eN;
      c.lb.segment(r0, m) = qp.clb[idx(N)] - shift;
      c.ub.segment(r0, m) = qp.cub[idx(N)] - shift;
    }
  }
  c.H = 0.5 * (c.H + c.H.transpose()).eval();
  return c;
}

StageStep expand(const StageQpData &qp, const CondensedQp &cond, const Vec &du, const Vec &row_duals) {
  const int N = qp.N;
  const int nx = qp.nx;
  const int nu = qp.nu;
  StageStep s;
  const Vec dx = cond.G * du + cond.e;
  s.dx.resize(idx(N + 1));
  s.du.resize(idx(N));
  s.mu.resize(idx(N + 1));
  s.lambda.resize(idx(N + 1));
  for (int k = 0; k <= N; ++k) {
    s.dx[idx(k)] = dx.segment(k * nx, nx);
    s.mu[idx(k)] = row_duals.segment(cond.row_offset(k), qp.stage_rows(k));
    if (k < N) s.du[idx(k)] = du.segment(k * nu, nu);
  }

  s.lambda[idx(N)] = qp.H[idx(N)] * s.dx[idx(N)] + qp.g[idx(N)] + qp.C[idx(N)].transpose() * s.mu[idx(N)];
  Vec z(nx + nu);
  for (int k = N - 1; k >= 0; --k) {
    z << s.dx[idx(k)], s.du[idx(k)];
    const Vec grad = qp.H[idx(k)] * z + qp.g[idx(k)];
    s.lambda[idx(k)] = grad.head(nx) + qp.A[idx(k)].transpose() * s.lambda[idx(k + 1)] +
                       qp.C[idx(k)].transpose() * s.mu[idx(k)];
  }
  return s;
}

double stage_qp_objective(const StageQpData &qp, const std::vector<Vec> &dx, const std::vector<Vec> &du) {
  double v = 0.0;
  Vec z(qp.nx + qp.nu);
  for (int k = 0; k < qp.N; ++k) {
    z << dx[idx(k)], du[idx(k)];
    v += 0.5 * z.dot(qp.H[idx(k)] * z) + qp.g[idx(k)].dot(z);
  }
  const Vec &xN = dx[idx(qp.N)];
  v += 0.5 * xN.dot(qp.H[idx(qp.N)] * xN) + qp.g[idx(qp.N)].dot(xN);
  return v;
}

double condensed_objective(const CondensedQp &cond, const Vec &du) {
  return 0.5 * du.dot(cond.H * du) + cond.g.dot(du);
}

} // namespace rtnmpc
