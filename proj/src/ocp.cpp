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

#include "rtnmpc/ocp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rtnmpc/errors.hpp"

namespace rtnmpc {

namespace {

std::span<const double> as_span(const Vec &v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

void expect_size(const Vec &v, int n, const char *what) {
  if (v.size() != n) {
    std::ostringstream os;
    os << what << " has length " << v.size() << ", expected " << n;
    throw ConfigError(os.str());
  }
}

void check_args(const OcpProblem &problem, const Vec &x, const Vec &u, const Vec &p, bool with_u) {
  expect_size(x, problem.dims.nx, "state");
  if (with_u) expect_size(u, problem.dims.nu, "input");
  expect_size(p, problem.dims.np, "parameter vector");
}

void check_psd(const Mat &M, int n, const char *what) {
  if (M.rows() != n || M.cols() != n) {
    std::ostringstream os;
    os << what << " is " << M.rows() << "x" << M.cols() << ", expected " << n << "x" << n;
    throw ConfigError(os.str());
  }
  if (n == 0) return;
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ConfigError(std::string(what) + " is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(M, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-12 * scale) {
    throw ConfigError(std::string(what) + " is not positive semidefinite");
  }
}

void check_bounds(const Vec &lb, const Vec &ub, int n, const char *what) {
  expect_size(lb, n, what);
  expect_size(ub, n, what);
  for (int i = 0; i < n; ++i) {
    if (!(lb[i] <= ub[i])) {
      std::ostringstream os;
      os << what << " row " << i << ": lower bound " << lb[i] << " exceeds upper bound " << ub[i];
      throw ConfigError(os.str());
    }
  }
}

// Evaluates fn on AdScalar inputs seeded chunk by chunk over the stacked
// (x, u) directions and scatters the partials into jac (m x (nx+nu)).
template <class Fn> void ad_jacobian(const Vec &x, const Vec &u, int m, Fn &&fn, Vec &value, Mat &jac) {
  const int nx = static_cast<int>(x.size());
  const int nu = static_cast<int>(u.size());
  const int n = nx + nu;
  value.resize(m);
  jac.setZero(m, n);
  std::vector<AdScalar> xa(static_cast<std::size_t>(nx)), ua(static_cast<std::size_t>(nu)),
      out(static_cast<std::size_t>(m));
  const int sweeps = std::max(1, (n + kAdChunk - 1) / kAdChunk);
  for (int s = 0; s < sweeps; ++s) {
    const int first = s * kAdChunk;
    for (int i = 0; i < nx; ++i) {
      const int dir = i - first;
      xa[i] = (dir >= 0 && dir < kAdChunk) ? AdScalar::variable(x[i], dir) : AdScalar(x[i]);
    }
    for (int j = 0; j < nu; ++j) {
      const int dir = nx + j - first;
      ua[j] = (dir >= 0 && dir < kAdChunk) ? AdScalar::variable(u[j], dir) : AdScalar(u[j]);
    }
    std::fill(out.begin(), out.end(), AdScalar(0.0));
    fn(std::span<const AdScalar>(xa), std::span<const AdScalar>(ua), std::span<AdScalar>(out));
    if (s == 0) {
      for (int r = 0; r < m; ++r) value[r] = out[r].value();
    }
    const int width = std::min(kAdChunk, n - first);
    for (int r = 0; r < m; ++r) {
      for (int d = 0; d < width; ++d) jac(r, first + d) = out[r].partial(d);
    }
  }
}

} // namespace

void Dims::validate() const {
  if (nx < 0 || nu < 0 || nr < 0 || nrN < 0 || nc < 0 || ncN < 0 || np < 0) {
    throw ConfigError("dimension counts must be non-negative");
  }
  if (N < 1) throw ConfigError("horizon N must be at least 1");
  if (!(Ts > 0.0) || !std::isfinite(Ts)) throw ConfigError("shooting interval Ts must be positive");
}

void OcpProblem::validate() const {
  dims.validate();
  if (!model) throw ConfigError("problem '" + name + "' has no model");
  check_psd(W, dims.nr, "stage weight W");
  check_psd(WN, dims.nrN, "terminal weight WN");
  if (!stage_W.empty()) {
    if (static_cast<int>(stage_W.size()) != dims.N) throw ConfigError("per-stage weights must have N entries");
    for (const auto &Wk : stage_W) check_psd(Wk, dims.nr, "per-stage weight");
  }
  check_bounds(lb, ub, dims.nc, "stage constraint bounds");
  check_bounds(lbN, ubN, dims.ncN, "terminal constraint bounds");
  expect_size(default_params, dims.np, "default parameters");
}

Vec eval_dynamics(const OcpProblem &problem, const Vec &x, const Vec &u, const Vec &p) {
  check_args(problem, x, u, p, true);
  Vec f = Vec::Zero(problem.dims.nx);
  problem.model->dynamics(as_span(x), as_span(u), as_span(p), {f.data(), static_cast<std::size_t>(f.size())});
  return f;
}

DynamicsJacobian jac_dynamics(const OcpProblem &problem, const Vec &x, const Vec &u, const Vec &p) {
  check_args(problem, x, u, p, true);
  const int nx = problem.dims.nx;
  DynamicsJacobian out;
  Mat jac;
  ad_jacobian(
      x, u, nx,
      [&](std::span<const AdScalar> xa, std::span<const AdScalar> ua, std::span<AdScalar> o) {
        problem.model->dynamics(xa, ua, as_span(p), o);
      },
      out.f, jac);
  out.fx = jac.leftCols(nx);
  out.fu = jac.rightCols(problem.dims.nu);
  return out;
}

Vec eval_residual(const OcpProblem &problem, const Vec &x, const Vec &u, const Vec &p, bool terminal) {
  check_args(problem, x, u, p, !terminal);
  const int m = terminal ? problem.dims.nrN : problem.dims.nr;
  Vec h = Vec::Zero(m);
  std::span<double> out(h.data(), static_cast<std::size_t>(m));
  if (terminal) {
    problem.model->terminal_residual(as_span(x), as_span(p), out);
  } else {
    problem.model->stage_residual(as_span(x), as_span(u), as_span(p), out);
  }
  return h;
}

ResidualEval eval_residual_and_jac(const OcpProblem &problem, const Vec &x, const Vec &u, const Vec &p,
                                   bool terminal) {
  check_args(problem, x, u, p, !terminal);
  ResidualEval out;
  if (terminal) {
    ad_jacobian(
        x, Vec(), problem.dims.nrN,
        [&](std::span<const AdScalar> xa, std::span<const AdScalar>, std::span<AdScalar> o) {
          problem.model->terminal_residual(xa, as_span(p), o);
        },
        out.h, out.J);
  } else {
    ad_jacobian(
        x, u, problem.dims.nr,
        [&](std::span<const AdScalar> xa, std::span<const AdScalar> ua, std::span<AdScalar> o) {
          problem.model->stage_residual(xa, ua, as_span(p), o);
        },
        out.h, out.J);
  }
  return out;
}

Vec eval_constraint(const OcpProblem &problem, const Vec &x, const Vec &u, const Vec &p, bool terminal) {
  check_args(problem, x, u, p, !terminal);
  const int m = terminal ? problem.dims.ncN : problem.dims.nc;
  Vec r = Vec::Zero(m);
  std::span<double> out(r.data(), static_cast<std::size_t>(m));
  if (terminal) {
    problem.model->terminal_constraint(as_span(x), as_span(p), out);
  } else {
    problem.model->stage_constraint(as_span(x), as_span(u), as_span(p), out);
  }
  return r;
}

ConstraintEval eval_constraint_and_jac(const OcpProblem &problem, const Vec &x, const Vec &u, const Vec &p,
                                       bool terminal) {
  check_args(problem, x, u, p, !terminal);
  ConstraintEval out;
  Mat jac;
  const int nx = problem.dims.nx;
  if (terminal) {
    ad_jacobian(
        x, Vec(), problem.dims.ncN,
        [&](std::span<const AdScalar> xa, std::span<const AdScalar>, std::span<AdScalar> o) {
          problem.model->terminal_constraint(xa, as_span(p), o);
        },
        out.r, out.C);
    return out;
  }
  ad_jacobian(
      x, u, problem.dims.nc,
      [&](std::span<const AdScalar> xa, std::span<const AdScalar> ua, std::span<AdScalar> o) {
        problem.model->stage_constraint(xa, ua, as_span(p), o);
      },
      out.r, jac);
  out.C = jac.leftCols(nx);
  out.D = jac.rightCols(problem.dims.nu);
  return out;
}

} // namespace rtnmpc
