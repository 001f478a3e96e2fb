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

#include "rtnmpc/integrator.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "rtnmpc/errors.hpp"

namespace rtnmpc {

namespace {

struct ButcherTableau {
  int stages;
  Mat a;
  Vec b;
};

const ButcherTableau &gauss_legendre(int stages) {
  static const ButcherTableau gl2 = [] {
    const double r3 = std::sqrt(3.0);
    ButcherTableau t{2, Mat(2, 2), Vec(2)};
    t.a << 0.25, 0.25 - r3 / 6.0,
           0.25 + r3 / 6.0, 0.25;
    t.b << 0.5, 0.5;
    return t;
  }();
  static const ButcherTableau gl3 = [] {
    const double r15 = std::sqrt(15.0);
    ButcherTableau t{3, Mat(3, 3), Vec(3)};
    t.a << 5.0 / 36.0, 2.0 / 9.0 - r15 / 15.0, 5.0 / 36.0 - r15 / 30.0,
           5.0 / 36.0 + r15 / 24.0, 2.0 / 9.0, 5.0 / 36.0 - r15 / 24.0,
           5.0 / 36.0 + r15 / 30.0, 2.0 / 9.0 + r15 / 15.0, 5.0 / 36.0;
    t.b << 5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0;
    return t;
  }();
  if (stages == 2) return gl2;
  if (stages == 3) return gl3;
  throw ConfigError("Gauss-Legendre integrator supports 2 or 3 stages");
}

bool all_finite(const Vec &v) { return v.allFinite(); }

} // namespace

std::string to_string(Scheme scheme) {
  switch (scheme) {
  case Scheme::Erk4: return "erk4";
  case Scheme::IrkGl2: return "irk-gl2";
  case Scheme::IrkGl3: return "irk-gl3";
  }
  return "unknown";
}

Scheme parse_scheme(const std::string &name) {
  if (name == "erk4") return Scheme::Erk4;
  if (name == "irk-gl2") return Scheme::IrkGl2;
  if (name == "irk-gl3") return Scheme::IrkGl3;
  throw ConfigError("unknown integrator scheme '" + name + "' (expected erk4, irk-gl2 or irk-gl3)");
}

void IntegratorConfig::validate() const {
  if (steps_per_interval < 1) throw ConfigError("integrator.steps must be at least 1");
  if (!(newton_tol > 0.0)) throw ConfigError("integrator.newton_tol must be positive");
  if (newton_max_iters < 1) throw ConfigError("integrator.newton_max_iters must be at least 1");
}

StepResult erk4_step(const OcpProblem &problem, const Vec &x, const Vec &u, const Vec &p, double h,
                     bool with_sens) {
  if (!(h > 0.0)) throw ConfigError("integration step must be positive");
  const int nx = problem.dims.nx;
  const int nu = problem.dims.nu;
  static constexpr std::array<double, 4> kNodes{0.0, 0.5, 0.5, 1.0};
  static constexpr std::array<double, 4> kWeights{1.0 / 6.0, 2.0 / 6.0, 2.0 / 6.0, 1.0 / 6.0};

  StepResult out;
  out.x_next = x;
  Vec k = Vec::Zero(nx);
  Mat dk;                      // d k / d(x, u)
  Mat S;                       // accumulated d x_next / d(x, u)
  Mat seed;                    // d(stage state) / d(x, u)
  if (with_sens) {
    S = Mat::Identity(nx, nx + nu);
    dk.setZero(nx, nx + nu);
  }
  for (int i = 0; i < 4; ++i) {
    Vec xi = (i == 0) ? x : Vec(x + (h * kNodes[i]) * k);
    if (!all_finite(xi)) {
      throw IntegrationError("non-finite state in RK4 stage " + std::to_string(i + 1), i + 1, std::nan(""));
    }
    if (with_sens) {
      seed = Mat::Identity(nx, nx + nu);
      if (i > 0) seed += (h * kNodes[i]) * dk;
      const DynamicsJacobian jac = jac_dynamics(problem, xi, u, p);
      k = jac.f;
      dk = jac.fx * seed.leftCols(nx + nu);
      dk.rightCols(nu) += jac.fu;
      S += (h * kWeights[i]) * dk;
    } else {
      k = eval_dynamics(problem, xi, u, p);
    }
    out.x_next += (h * kWeights[i]) * k;
  }
  if (!all_finite(out.x_next)) throw IntegrationError("non-finite state after RK4 update", 4, std::nan(""));
  if (with_sens) {
    out.A = S.leftCols(nx);
    out.B = S.rightCols(nu);
  }
  return out;
}

StepResult irk_gl_step(const OcpProblem &problem, const Vec &x, const Vec &u, const Vec &p, double h, int stages,
                       bool with_sens, double newton_tol, int newton_max_iters) {
  if (!(h > 0.0)) throw ConfigError("integration step must be positive");
  const ButcherTableau &tab = gauss_legendre(stages);
  const int nx = problem.dims.nx;
  const int nu = problem.dims.nu;
  const int s = tab.stages;
  const int n = s * nx;

  // Stage derivatives, all initialized with f at the interval start.
  Vec K(n);
  const Vec f0 = eval_dynamics(problem, x, u, p);
  for (int i = 0; i < s; ++i) K.segment(i * nx, nx) = f0;

  std::vector<Mat> fx(static_cast<std::size_t>(s)), fu(static_cast<std::size_t>(s));
  Vec R(n);
  Mat M(n, n);
  Eigen::PartialPivLU<Mat> lu;
  double res_norm = std::numeric_limits<double>::infinity();
  int iters = 0;
  bool converged = false;

  auto stage_state = [&](int i) {
    Vec xi = x;
    for (int j = 0; j < s; ++j) xi += (h * tab.a(i, j)) * K.segment(j * nx, nx);
    return xi;
  };
  auto assemble_newton_matrix = [&] {
    for (int i = 0; i < s; ++i) {
      for (int j = 0; j < s; ++j) {
        M.block(i * nx, j * nx, nx, nx) = (-h * tab.a(i, j)) * fx[static_cast<std::size_t>(i)];
        if (i == j) M.block(i * nx, j * nx, nx, nx).diagonal().array() += 1.0;
      }
    }
    lu.compute(M);
  };

  while (iters < newton_max_iters) {
    ++iters;
    bool have_jac = false;
    for (int i = 0; i < s; ++i) {
      const Vec xi = stage_state(i);
      if (!all_finite(xi)) {
        throw IntegrationError("non-finite stage state in implicit integrator", -1, res_norm);
      }
      if (with_sens) {
        DynamicsJacobian jac = jac_dynamics(problem, xi, u, p);
        R.segment(i * nx, nx) = K.segment(i * nx, nx) - jac.f;
        fx[static_cast<std::size_t>(i)] = std::move(jac.fx);
        fu[static_cast<std::size_t>(i)] = std::move(jac.fu);
      } else {
        R.segment(i * nx, nx) = K.segment(i * nx, nx) - eval_dynamics(problem, xi, u, p);
      }
    }
    have_jac = with_sens;
    res_norm = n > 0 ? R.lpNorm<Eigen::Infinity>() : 0.0;
    if (!std::isfinite(res_norm)) {
      throw IntegrationError("non-finite stage residual in implicit integrator", -1, res_norm);
    }
    if (res_norm <= newton_tol) {
      converged = true;
      if (with_sens) assemble_newton_matrix();
      break;
    }
    if (!have_jac) {
      for (int i = 0; i < s; ++i) {
        DynamicsJacobian jac = jac_dynamics(problem, stage_state(i), u, p);
        fx[static_cast<std::size_t>(i)] = std::move(jac.fx);
        fu[static_cast<std::size_t>(i)] = std::move(jac.fu);
      }
    }
    assemble_newton_matrix();
    K -= lu.solve(R);
  }
  if (!converged) {
    std::ostringstream os;
    os << "implicit integrator Newton iteration did not converge in " << newton_max_iters
       << " iterations (residual " << res_norm << ")";
    throw IntegrationError(os.str(), -1, res_norm);
  }

  StepResult out;
  out.newton_iters = iters;
  out.x_next = x;
  for (int i = 0; i < s; ++i) out.x_next += (h * tab.b[i]) * K.segment(i * nx, nx);
  if (!all_finite(out.x_next)) throw IntegrationError("non-finite state after implicit step", -1, res_norm);

  if (with_sens) {
    Mat rhs(n, nx + nu);
    for (int i = 0; i < s; ++i) {
      rhs.block(i * nx, 0, nx, nx) = fx[static_cast<std::size_t>(i)];
      rhs.block(i * nx, nx, nx, nu) = fu[static_cast<std::size_t>(i)];
    }
    const Mat dK = lu.solve(rhs);
    Mat S = Mat::Identity(nx, nx + nu);
    for (int i = 0; i < s; ++i) S += (h * tab.b[i]) * dK.middleRows(i * nx, nx);
    out.A = S.leftCols(nx);
    out.B = S.rightCols(nu);
  }
  return out;
}

StepResult integrator_step(const OcpProblem &problem, const IntegratorConfig &config, const Vec &x, const Vec &u,
                           const Vec &p, double h, bool with_sens) {
  switch (config.scheme) {
  case Scheme::Erk4: return erk4_step(problem, x, u, p, h, with_sens);
  case Scheme::IrkGl2:
    return irk_gl_step(problem, x, u, p, h, 2, with_sens, config.newton_tol, config.newton_max_iters);
  case Scheme::IrkGl3:
    return irk_gl_step(problem, x, u, p, h, 3, with_sens, config.newton_tol, config.newton_max_iters);
  }
  throw ConfigError("unsupported integrator scheme");
}

StepResult integrate(const OcpProblem &problem, const IntegratorConfig &config, const Vec &x, const Vec &u,
                     const Vec &p, double duration, bool with_sens) {
  config.validate();
  const int m = config.steps_per_interval;
  const double h = duration / m;
  StepResult total = integrator_step(problem, config, x, u, p, h, with_sens);
  for (int j = 1; j < m; ++j) {
    StepResult next = integrator_step(problem, config, total.x_next, u, p, h, with_sens);
    if (with_sens) {
      // latest step leftmost
      total.B = next.A * total.B + next.B;
      total.A = next.A * total.A;
    }
    total.x_next = std::move(next.x_next);
    total.newton_iters += next.newton_iters;
  }
  return total;
}

StepResult simulate_interval(const OcpProblem &problem, const IntegratorConfig &config, const Vec &x, const Vec &u,
                             const Vec &p, bool with_sens) {
  return integrate(problem, config, x, u, p, problem.dims.Ts, with_sens);
}

} // namespace rtnmpc
