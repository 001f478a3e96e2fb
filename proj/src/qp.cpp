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

#include "rtnmpc/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rtnmpc/errors.hpp"

namespace rtnmpc {

namespace {

std::size_t idx(int k) { return static_cast<std::size_t>(k); }

constexpr double kFractionToBoundary = 0.995;
constexpr double kInfeasibleDualBound = 1e12;
constexpr double kPolishPenalty = 1e2;  // augmented Lagrangian weight for the sparse polish
constexpr int kPolishIters = 30;

// Dense backend: primal is x, Newton matrix H + C' Sigma C.
class DenseBackend {
public:
  DenseBackend(const Mat &H, const Vec &g, const Mat &C, const Vec &lb, const Vec &ub, double reg_eps)
      : H_(H), g_(g), C_(C), lb_(lb), ub_(ub) {
    const int n = static_cast<int>(H.rows());
    if (n > 0) {
      Eigen::SelfAdjointEigenSolver<Mat> es(H_, Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() < reg_eps) H_.diagonal().array() += reg_eps;
    }
  }

  int n() const { return static_cast<int>(H_.rows()); }
  int m() const { return static_cast<int>(C_.rows()); }
  const Vec &lb() const { return lb_; }
  const Vec &ub() const { return ub_; }
  Vec apply_C(const Vec &v) const { return C_ * v; }
  Vec apply_Ct(const Vec &y) const { return C_.transpose() * y; }
  Vec grad(const Vec &v) const { return H_ * v + g_; }

  bool factor(const Vec &sigma) {
    K_ = H_;
    if (m() > 0) K_.noalias() += C_.transpose() * sigma.asDiagonal() * C_;
    llt_.compute(K_);
    return llt_.info() == Eigen::Success;
  }
  Vec solve(const Vec &rhs) const { return llt_.solve(rhs); }

  // Equality-constrained solve on a guessed active set. side[i] is -1 for lower, +1 for upper, 0 inactive.
  bool polish(const std::vector<int> &side, Vec &v, Vec &y) const {
    std::vector<int> rows;
    for (int i = 0; i < m(); ++i) {
      if (side[idx(i)] != 0) rows.push_back(i);
    }
    const int n = this->n();
    const int a = static_cast<int>(rows.size());
    Mat K = Mat::Zero(n + a, n + a);
    Vec rhs(n + a);
    K.topLeftCorner(n, n) = H_;
    rhs.head(n) = -g_;
    for (int j = 0; j < a; ++j) {
      const int i = rows[idx(j)];
      K.block(n + j, 0, 1, n) = C_.row(i);
      K.block(0, n + j, n, 1) = C_.row(i).transpose();
      rhs[n + j] = side[idx(i)] < 0 ? lb_[i] : ub_[i];
    }
    const Vec sol = Eigen::PartialPivLU<Mat>(K).solve(rhs);
    if (!sol.allFinite()) return false;
    v = sol.head(n);
    y = Vec::Zero(m());
    for (int j = 0; j < a; ++j) y[rows[idx(j)]] = sol[n + j];
    return true;
  }

private:
  Mat H_;
  Vec g_;
  const Mat &C_;
  const Vec &lb_;
  const Vec &ub_;
  Mat K_;
  Eigen::LLT<Mat> llt_;
};

// Stage-structured backend. The primal vector stacks (x_0,u_0,...,x_{N-1},u_{N-1},x_N)
// followed by the continuity multipliers lambda_0..lambda_N, so the Newton
// matrix is the full symmetric KKT matrix of the equality-constrained part.
class RiccatiBackend {
public:
  RiccatiBackend(const StageQpData &qp, const Vec &dx0, double reg_eps)
      : qp_(qp), dx0_(dx0), N_(qp.N), nx_(qp.nx), nu_(qp.nu), reg_eps_(reg_eps) {
    row_off_.assign(idx(N_ + 2), 0);
    for (int k = 0; k <= N_; ++k) row_off_[idx(k + 1)] = row_off_[idx(k)] + qp.stage_rows(k);
    lb_.resize(row_off_.back());
    ub_.resize(row_off_.back());
    for (int k = 0; k <= N_; ++k) {
      lb_.segment(row_off_[idx(k)], qp.stage_rows(k)) = qp.clb[idx(k)];
      ub_.segment(row_off_[idx(k)], qp.stage_rows(k)) = qp.cub[idx(k)];
    }
    P_.resize(idx(N_ + 1));
    K_.resize(idx(N_));
    Qux_.resize(idx(N_));
    Quu_llt_.resize(idx(N_));
    kff_.resize(idx(N_));
    p_.resize(idx(N_ + 1));
  }

  int n() const { return lam_off(0) + (N_ + 1) * nx_; }
  int m() const { return row_off_.back(); }
  const Vec &lb() const { return lb_; }
  const Vec &ub() const { return ub_; }

  int z_off(int k) const { return k * (nx_ + nu_); }
  int lam_off(int k) const { return N_ * (nx_ + nu_) + nx_ + k * nx_; }
  int z_len(int k) const { return k < N_ ? nx_ + nu_ : nx_; }

  Vec apply_C(const Vec &v) const {
    Vec out(m());
    for (int k = 0; k <= N_; ++k) {
      const int rows = qp_.stage_rows(k);
      if (rows == 0) continue;
      auto seg = out.segment(row_off_[idx(k)], rows);
      seg = qp_.C[idx(k)] * v.segment(z_off(k), nx_);
      if (k < N_) seg += qp_.D[idx(k)] * v.segment(z_off(k) + nx_, nu_);
    }
    return out;
  }

  Vec apply_Ct(const Vec &y) const {
    Vec out = Vec::Zero(n());
    for (int k = 0; k <= N_; ++k) {
      const int rows = qp_.stage_rows(k);
      if (rows == 0) continue;
      const auto seg = y.segment(row_off_[idx(k)], rows);
      out.segment(z_off(k), nx_) = qp_.C[idx(k)].transpose() * seg;
      if (k < N_) out.segment(z_off(k) + nx_, nu_) = qp_.D[idx(k)].transpose() * seg;
    }
    return out;
  }

  // Gradient of the Lagrangian of the equality-constrained part:
  // stationarity rows per stage, then constraint residuals.
  Vec grad(const Vec &v) const {
    Vec out(n());
    for (int k = 0; k <= N_; ++k) {
      const auto z = v.segment(z_off(k), z_len(k));
      auto gk = out.segment(z_off(k), z_len(k));
      gk = qp_.H[idx(k)] * z + qp_.g[idx(k)];
      gk.head(nx_) -= v.segment(lam_off(k), nx_);
      if (k < N_) {
        const auto lam_next = v.segment(lam_off(k + 1), nx_);
        gk.head(nx_) += qp_.A[idx(k)].transpose() * lam_next;
        gk.tail(nu_) += qp_.B[idx(k)].transpose() * lam_next;
      }
    }
    out.segment(lam_off(0), nx_) = dx0_ - v.segment(z_off(0), nx_);
    for (int k = 0; k < N_; ++k) {
      out.segment(lam_off(k + 1), nx_) = qp_.A[idx(k)] * v.segment(z_off(k), nx_) +
                                         qp_.B[idx(k)] * v.segment(z_off(k) + nx_, nu_) + qp_.d[idx(k)] -
                                         v.segment(z_off(k + 1), nx_);
    }
    return out;
  }

  // Backward Riccati factorization of the Newton matrix with the barrier
  // terms C' Sigma C folded into each stage Hessian.
  bool factor(const Vec &sigma) {
    Mat Hn = qp_.H[idx(N_)];
    add_barrier(N_, sigma, Hn);
    P_[idx(N_)] = Hn;
    for (int k = N_ - 1; k >= 0; --k) {
      Mat Hk = qp_.H[idx(k)];
      add_barrier(k, sigma, Hk);
      const Mat &A = qp_.A[idx(k)];
      const Mat &B = qp_.B[idx(k)];
      const Mat &P = P_[idx(k + 1)];
      const Mat PA = P * A;
      const Mat PB = P * B;
      Mat Quu = Hk.bottomRightCorner(nu_, nu_) + B.transpose() * PB;
      Qux_[idx(k)] = Hk.bottomLeftCorner(nu_, nx_) + B.transpose() * PA;
      const Mat Qxx = Hk.topLeftCorner(nx_, nx_) + A.transpose() * PA;
      Quu_llt_[idx(k)].compute(Quu);
      if (Quu_llt_[idx(k)].info() != Eigen::Success) {
        Quu.diagonal().array() += reg_eps_;
        Quu_llt_[idx(k)].compute(Quu);
        if (Quu_llt_[idx(k)].info() != Eigen::Success) return false;
      }
      K_[idx(k)] = -Quu_llt_[idx(k)].solve(Qux_[idx(k)]);
      Mat Pk = Qxx + Qux_[idx(k)].transpose() * K_[idx(k)];
      P_[idx(k)] = 0.5 * (Pk + Pk.transpose());
      if (!P_[idx(k)].allFinite()) return false;
    }
    return true;
  }

  Vec solve(const Vec &rhs) {
    // Stationarity rows give q = -rhs, constraint rows give the affine terms.
    p_[idx(N_)] = -rhs.segment(z_off(N_), nx_);
    std::vector<Vec> b(idx(N_));
    for (int k = N_ - 1; k >= 0; --k) {
      b[idx(k)] = -rhs.segment(lam_off(k + 1), nx_);
      const Vec q = -rhs.segment(z_off(k), nx_ + nu_);
      const Vec s = P_[idx(k + 1)] * b[idx(k)] + p_[idx(k + 1)];
      const Vec qx = q.head(nx_) + qp_.A[idx(k)].transpose() * s;
      const Vec qu = q.tail(nu_) + qp_.B[idx(k)].transpose() * s;
      kff_[idx(k)] = -Quu_llt_[idx(k)].solve(qu);
      p_[idx(k)] = qx + Qux_[idx(k)].transpose() * kff_[idx(k)];
    }
    Vec out(n());
    Vec x = -rhs.segment(lam_off(0), nx_);
    for (int k = 0; k < N_; ++k) {
      const Vec u = K_[idx(k)] * x + kff_[idx(k)];
      out.segment(z_off(k), nx_) = x;
      out.segment(z_off(k) + nx_, nu_) = u;
      out.segment(lam_off(k), nx_) = P_[idx(k)] * x + p_[idx(k)];
      x = qp_.A[idx(k)] * x + qp_.B[idx(k)] * u + b[idx(k)];
    }
    out.segment(z_off(N_), nx_) = x;
    out.segment(lam_off(N_), nx_) = P_[idx(N_)] * x + p_[idx(N_)];
    return out;
  }

  StageStep unpack(const Vec &v, const Vec &row_duals) const {
    StageStep s;
    s.dx.resize(idx(N_ + 1));
    s.du.resize(idx(N_));
    s.lambda.resize(idx(N_ + 1));
    s.mu.resize(idx(N_ + 1));
    for (int k = 0; k <= N_; ++k) {
      s.dx[idx(k)] = v.segment(z_off(k), nx_);
      if (k < N_) s.du[idx(k)] = v.segment(z_off(k) + nx_, nu_);
      s.lambda[idx(k)] = v.segment(lam_off(k), nx_);
      s.mu[idx(k)] = row_duals.segment(row_off_[idx(k)], qp_.stage_rows(k));
    }
    return s;
  }

private:
  void add_barrier(int k, const Vec &sigma, Mat &Hk) const {
    const int rows = qp_.stage_rows(k);
    if (rows == 0) return;
    const auto s = sigma.segment(row_off_[idx(k)], rows);
    if (k < N_) {
      Mat CD(rows, nx_ + nu_);
      CD << qp_.C[idx(k)], qp_.D[idx(k)];
      Hk.noalias() += CD.transpose() * s.asDiagonal() * CD;
    } else {
      Hk.noalias() += qp_.C[idx(k)].transpose() * s.asDiagonal() * qp_.C[idx(k)];
    }
  }

  const StageQpData &qp_;
  const Vec &dx0_;
  int N_, nx_, nu_;
  double reg_eps_;
  std::vector<int> row_off_;
  Vec lb_, ub_;
  std::vector<Mat> P_, K_, Qux_;
  std::vector<Eigen::LLT<Mat>> Quu_llt_;
  std::vector<Vec> kff_, p_;
};

struct Certificate {
  double stationarity = 0.0;
  double feasibility = 0.0;
  double complementarity = 0.0;
  double max() const { return std::max({stationarity, feasibility, complementarity}); }
};

// Residuals at (v, y) with y the signed row multipliers.
template <class Backend> Certificate certify(const Backend &be, const Vec &v, const Vec &y, const Vec &Cv) {
  Certificate c;
  const Vec rd = be.grad(v) + be.apply_Ct(y);
  c.stationarity = rd.size() > 0 ? rd.lpNorm<Eigen::Infinity>() : 0.0;
  for (int i = 0; i < be.m(); ++i) {
    const double lo = be.lb()[i];
    const double hi = be.ub()[i];
    c.feasibility = std::max({c.feasibility, lo - Cv[i], Cv[i] - hi});
    if (y[i] > 0.0) {
      c.complementarity = std::max(c.complementarity, y[i] * std::abs(hi - Cv[i]));
    } else if (y[i] < 0.0) {
      c.complementarity = std::max(c.complementarity, -y[i] * std::abs(Cv[i] - lo));
    }
  }
  return c;
}

double max_step(const Vec &val, const Vec &dir, const std::vector<char> &mask) {
  double alpha = 1.0;
  for (int i = 0; i < val.size(); ++i) {
    if (mask[idx(i)] && dir[i] < 0.0) alpha = std::min(alpha, -val[i] / dir[i]);
  }
  return alpha;
}

template <class Backend> QpSolution interior_point(Backend &be, const QpSolverConfig &config) {
  config.validate();
  const int m = be.m();
  const Vec &lb = be.lb();
  const Vec &ub = be.ub();
  std::vector<char> has_l(idx(m)), has_u(idx(m));
  int active_sides = 0;
  for (int i = 0; i < m; ++i) {
    if (lb[i] > ub[i]) {
      QpSolution bad;
      bad.status = QpStatus::Infeasible;
      return bad;
    }
    has_l[idx(i)] = std::isfinite(lb[i]) ? 1 : 0;
    has_u[idx(i)] = std::isfinite(ub[i]) ? 1 : 0;
    active_sides += has_l[idx(i)] + has_u[idx(i)];
  }

  QpSolution sol;
  auto finish = [&](const Vec &v, const Vec &zl, const Vec &zu, QpStatus status, int iters) {
    sol.primal = v;
    // Collapse each pair onto its signed difference; stationarity only sees the difference.
    Vec y = zu - zl;
    sol.dual_lower = (-y).cwiseMax(0.0);
    sol.dual_upper = y.cwiseMax(0.0);
    sol.kkt_residual = certify(be, v, y, be.apply_C(v)).max();
    sol.status = status;
    sol.iters = iters;
    return sol;
  };

  auto accept_polish = [&](const QpSolution &base, const std::vector<int> &side, const Vec &pv, Vec py,
                           QpStatus status, int iters) {
    for (int i = 0; i < m; ++i) {
      if (side[idx(i)] * py[i] < 0.0) py[i] = 0.0;
    }
    const double res = certify(be, pv, py, be.apply_C(pv)).max();
    if (!(res <= base.kkt_residual)) return base;
    QpSolution out = finish(pv, (-py).cwiseMax(0.0), py.cwiseMax(0.0), status, iters);
    if (status != QpStatus::Optimal && res <= config.tol) out.status = QpStatus::Optimal;
    out.barrier_history = base.barrier_history;
    return out;
  };

  // Polish converged or stalled iterates on the active set read off the slack/dual ratio.
  auto polished = [&](const Vec &v, const Vec &sl, const Vec &su, const Vec &zl, const Vec &zu, QpStatus status,
                      int iters) {
    QpSolution base = finish(v, zl, zu, status, iters);
    if (m == 0 || !v.allFinite()) return base;
    std::vector<int> side(idx(m), 0);
    for (int i = 0; i < m; ++i) {
      if (has_l[idx(i)] && sl[i] < zl[i]) side[idx(i)] = -1;
      else if (has_u[idx(i)] && su[i] < zu[i]) side[idx(i)] = 1;
    }
    if constexpr (requires(const Backend &b, std::vector<int> &s, Vec &x) { b.polish(s, x, x); }) {
      Vec pv, py;
      if (!be.polish(side, pv, py)) return base;
      return accept_polish(base, side, pv, py, status, iters);
    } else {
      // Augmented Lagrangian iterations on the active rows.
      Vec target = Vec::Zero(m), sigma_a = Vec::Zero(m);
      for (int i = 0; i < m; ++i) {
        if (side[idx(i)] == 0) continue;
        target[i] = side[idx(i)] < 0 ? lb[i] : ub[i];
        sigma_a[i] = kPolishPenalty;
      }
      if (!be.factor(sigma_a)) return base;
      Vec pv = v;
      Vec py = (zu - zl).cwiseProduct(sigma_a.cwiseSign());
      Vec best_v = pv, best_y = py;
      double best = certify(be, pv, py, be.apply_C(pv)).max();
      for (int it = 0; it < kPolishIters; ++it) {
        const Vec viol = (be.apply_C(pv) - target).cwiseProduct(sigma_a.cwiseSign());
        pv += be.solve(-be.grad(pv) - be.apply_Ct(py + sigma_a.cwiseProduct(viol)));
        if (!pv.allFinite()) break;
        py += sigma_a.cwiseProduct(be.apply_C(pv) - target);
        const double res = certify(be, pv, py, be.apply_C(pv)).max();
        if (res <= best) {
          best = res;
          best_v = pv;
          best_y = py;
        }
      }
      return accept_polish(base, side, best_v, best_y, status, iters);
    }
  };

  // Least-squares start: minimizer of the problem without inequalities.
  const Vec zero_rows = Vec::Zero(m);
  if (!be.factor(zero_rows)) {
    Vec v0 = Vec::Zero(be.n());
    return finish(v0, zero_rows, zero_rows, QpStatus::NumericalFailure, 0);
  }
  Vec v = be.solve(-be.grad(Vec::Zero(be.n())));
  if (!v.allFinite()) return finish(Vec::Zero(be.n()), zero_rows, zero_rows, QpStatus::NumericalFailure, 0);

  Vec Cv = be.apply_C(v);
  if (certify(be, v, zero_rows, Cv).max() <= config.tol) return finish(v, zero_rows, zero_rows, QpStatus::Optimal, 0);
  Vec sl = Vec::Ones(m), su = Vec::Ones(m), zl = Vec::Zero(m), zu = Vec::Zero(m);
  for (int i = 0; i < m; ++i) {
    if (has_l[idx(i)]) {
      sl[i] = std::max(Cv[i] - lb[i], 1.0);
      zl[i] = 1.0;
    }
    if (has_u[idx(i)]) {
      su[i] = std::max(ub[i] - Cv[i], 1.0);
      zu[i] = 1.0;
    }
  }

  Vec rpl(m), rpu(m), sigma(m), tl(m), tu(m), w(m);
  auto newton_direction = [&](const Vec &rd, Vec &dv, Vec &dsl, Vec &dsu, Vec &dzl, Vec &dzu) {
    for (int i = 0; i < m; ++i) {
      double wi = 0.0;
      if (has_l[idx(i)]) wi += -tl[i] / sl[i] + (zl[i] / sl[i]) * rpl[i];
      if (has_u[idx(i)]) wi += tu[i] / su[i] + (zu[i] / su[i]) * rpu[i];
      w[i] = wi;
    }
    dv = be.solve(-rd - be.apply_Ct(w));
    const Vec Cdv = be.apply_C(dv);
    for (int i = 0; i < m; ++i) {
      dsl[i] = has_l[idx(i)] ? Cdv[i] + rpl[i] : 0.0;
      dsu[i] = has_u[idx(i)] ? -Cdv[i] - rpu[i] : 0.0;
      dzl[i] = has_l[idx(i)] ? (tl[i] - zl[i] * dsl[i]) / sl[i] : 0.0;
      dzu[i] = has_u[idx(i)] ? (tu[i] - zu[i] * dsu[i]) / su[i] : 0.0;
    }
  };

  Vec dv, dsl(m), dsu(m), dzl(m), dzu(m);
  Vec dv_a, dsl_a(m), dsu_a(m), dzl_a(m), dzu_a(m);
  double last_target = std::numeric_limits<double>::infinity();
  for (int iter = 0;; ++iter) {
    Cv = be.apply_C(v);
    const Vec y = zu - zl;
    if (certify(be, v, y, Cv).max() <= config.tol) return polished(v, sl, su, zl, zu, QpStatus::Optimal, iter);
    if (iter >= config.max_iters) return polished(v, sl, su, zl, zu, QpStatus::MaxIters, iter);
    if (active_sides == 0) {
      // Equality-only problem: refine the start with the factorization already at hand.
      v += be.solve(-be.grad(v) - be.apply_Ct(y));
      if (!v.allFinite()) return finish(Vec::Zero(be.n()), zl, zu, QpStatus::NumericalFailure, iter);
      continue;
    }
    if (std::max(zl.maxCoeff(), zu.maxCoeff()) > kInfeasibleDualBound) {
      return finish(v, zl, zu, QpStatus::Infeasible, iter);
    }

    const Vec rd = be.grad(v) + be.apply_Ct(y);
    double comp = 0.0;
    for (int i = 0; i < m; ++i) {
      rpl[i] = has_l[idx(i)] ? Cv[i] - sl[i] - lb[i] : 0.0;
      rpu[i] = has_u[idx(i)] ? Cv[i] + su[i] - ub[i] : 0.0;
      sigma[i] = (has_l[idx(i)] ? zl[i] / sl[i] : 0.0) + (has_u[idx(i)] ? zu[i] / su[i] : 0.0);
      comp += (has_l[idx(i)] ? sl[i] * zl[i] : 0.0) + (has_u[idx(i)] ? su[i] * zu[i] : 0.0);
    }
    const double mu = comp / active_sides;
    if (!be.factor(sigma)) return polished(v, sl, su, zl, zu, QpStatus::NumericalFailure, iter);

    // Predictor.
    for (int i = 0; i < m; ++i) {
      tl[i] = -sl[i] * zl[i];
      tu[i] = -su[i] * zu[i];
    }
    newton_direction(rd, dv_a, dsl_a, dsu_a, dzl_a, dzu_a);
    const double a_aff = std::min({max_step(sl, dsl_a, has_l), max_step(su, dsu_a, has_u),
                                   max_step(zl, dzl_a, has_l), max_step(zu, dzu_a, has_u)});
    double comp_aff = 0.0;
    for (int i = 0; i < m; ++i) {
      if (has_l[idx(i)]) comp_aff += (sl[i] + a_aff * dsl_a[i]) * (zl[i] + a_aff * dzl_a[i]);
      if (has_u[idx(i)]) comp_aff += (su[i] + a_aff * dsu_a[i]) * (zu[i] + a_aff * dzu_a[i]);
    }
    const double mu_aff = comp_aff / active_sides;
    const double centering = std::pow(std::max(mu_aff, 0.0) / mu, 3.0);
    const double target = std::min(centering * mu, last_target);
    last_target = target;

    // Corrector with second-order term.
    for (int i = 0; i < m; ++i) {
      tl[i] = has_l[idx(i)] ? -sl[i] * zl[i] - dsl_a[i] * dzl_a[i] + target : 0.0;
      tu[i] = has_u[idx(i)] ? -su[i] * zu[i] - dsu_a[i] * dzu_a[i] + target : 0.0;
    }
    newton_direction(rd, dv, dsl, dsu, dzl, dzu);
    if (!dv.allFinite() || !dzl.allFinite() || !dzu.allFinite()) {
      return finish(v, zl, zu, QpStatus::NumericalFailure, iter);
    }
    const double a_max = std::min({max_step(sl, dsl, has_l), max_step(su, dsu, has_u), max_step(zl, dzl, has_l),
                                   max_step(zu, dzu, has_u)});
    const double alpha = std::min(1.0, kFractionToBoundary * a_max);
    v += alpha * dv;
    sl += alpha * dsl;
    su += alpha * dsu;
    zl += alpha * dzl;
    zu += alpha * dzu;
    sol.barrier_history.push_back(target);
  }
}

} // namespace

std::string to_string(QpStatus status) {
  switch (status) {
  case QpStatus::Optimal: return "optimal";
  case QpStatus::MaxIters: return "max_iters";
  case QpStatus::Infeasible: return "infeasible";
  case QpStatus::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

void QpSolverConfig::validate() const {
  if (!(tol > 0.0)) throw ConfigError("qp.tol must be positive");
  if (max_iters < 1) throw ConfigError("qp.max_iters must be at least 1");
  if (!(reg_eps >= 0.0)) throw ConfigError("qp.reg_eps must be non-negative");
}

QpSolution solve_dense(const Mat &H, const Vec &g, const Mat &C, const Vec &lb, const Vec &ub,
                       const QpSolverConfig &config) {
  const auto n = H.rows();
  if (H.cols() != n || g.size() != n || C.cols() != n || lb.size() != C.rows() || ub.size() != C.rows()) {
    throw ConfigError("dense QP data has inconsistent dimensions");
  }
  DenseBackend be(H, g, C, lb, ub, config.reg_eps);
  return interior_point(be, config);
}

QpSolution solve_sparse(const StageQpData &qp, const Vec &dx0, const QpSolverConfig &config) {
  if (dx0.size() != qp.nx) throw ConfigError("initial increment has wrong length");
  RiccatiBackend be(qp, dx0, config.reg_eps);
  QpSolution sol = interior_point(be, config);
  if (sol.primal.size() == be.n()) {
    sol.step = be.unpack(sol.primal, sol.row_duals());
    // Keep only the stage variables in the flat primal vector.
    sol.primal.conservativeResize(be.lam_off(0));
  }
  return sol;
}

QpSolution solve_condensed(const StageQpData &qp, const Vec &dx0, const QpSolverConfig &config) {
  const CondensedQp cond = condense(qp, dx0);
  QpSolution sol = solve_dense(cond.H, cond.g, cond.C, cond.lb, cond.ub, config);
  if (sol.primal.size() == cond.H.rows()) sol.step = expand(qp, cond, sol.primal, sol.row_duals());
  return sol;
}

} // namespace rtnmpc
