// Copyright 2026 The waspmpc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "waspmpc/oracles.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "waspmpc/errors.hpp"
#include "waspmpc/finite_diff.hpp"
#include "waspmpc/model_derivatives.hpp"
#include "waspmpc/planners.hpp"
#include "waspmpc/wasp.hpp"

namespace waspmpc::oracles {

namespace {

std::string format_bound(const std::string& what, double value, double bound) {
  std::ostringstream oss;
  oss.precision(3);
  oss << std::scientific << what << " " << value << " (bound " << bound << ")";
  return oss.str();
}

CheckResult bounded_check(const std::string& name, double value, double bound) {
  CheckResult result;
  result.name = name;
  result.passed = value <= bound;
  result.detail = format_bound("max discrepancy", value, bound);
  return result;
}

}  // namespace

Eigen::MatrixXd kkt_solve_dense(const Eigen::MatrixXd& approx_jvps,
                                const TangentMatrix& tangents, int column_index,
                                const Eigen::VectorXd& true_jvp) {
  const int n = tangents.dim;
  const int m = static_cast<int>(approx_jvps.rows());
  if (approx_jvps.cols() != n) {
    throw InvalidArgumentError("approx_jvps column count != tangent dimension");
  }
  if (column_index < 0 || column_index >= n) {
    throw InvalidArgumentError("column index out of range");
  }
  if (true_jvp.size() != m) {
    throw InvalidArgumentError("true_jvp size != output dimension");
  }

  // Each output row d solves
  //   min_d || X' d - g ||^2   s.t.   x_i' d = t_r
  // with X the tangent columns, g the predicted derivatives of that row,
  // x_i the constrained column and t_r the measured value. Stationarity of
  // the Lagrangian gives the bordered linear system below.
  const Eigen::MatrixXd& x_cols = tangents.columns;
  Eigen::MatrixXd kkt(n + 1, n + 1);
  kkt.topLeftCorner(n, n) = 2.0 * x_cols * x_cols.transpose();
  kkt.topRightCorner(n, 1) = x_cols.col(column_index);
  kkt.bottomLeftCorner(1, n) = x_cols.col(column_index).transpose();
  kkt(n, n) = 0.0;
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
  if (!lu.isInvertible()) {
    throw InvalidArgumentError("tangent matrix is rank deficient");
  }

  Eigen::MatrixXd jacobian(m, n);
  Eigen::VectorXd rhs(n + 1);
  for (int r = 0; r < m; ++r) {
    rhs.head(n) = 2.0 * x_cols * approx_jvps.row(r).transpose();
    rhs(n) = true_jvp(r);
    const Eigen::VectorXd solution = lu.solve(rhs);
    jacobian.row(r) = solution.head(n).transpose();
  }
  return jacobian;
}

LqrSolution solve_finite_horizon_lqr(const LqProblem& problem) {
  const int horizon = problem.horizon;
  const int state_dim = static_cast<int>(problem.A.rows());
  const int control_dim = static_cast<int>(problem.B.cols());
  if (horizon < 1) throw InvalidArgumentError("horizon must be >= 1");
  if (problem.A.cols() != state_dim || problem.B.rows() != state_dim ||
      problem.Q.rows() != state_dim || problem.R.rows() != control_dim ||
      problem.Qf.rows() != state_dim || problem.x0.size() != state_dim) {
    throw InvalidArgumentError("linear plant dimensions are inconsistent");
  }

  LqrSolution solution;
  solution.P.assign(static_cast<std::size_t>(horizon) + 1, Eigen::MatrixXd());
  solution.K.assign(static_cast<std::size_t>(horizon), Eigen::MatrixXd());
  solution.P[static_cast<std::size_t>(horizon)] = problem.Qf;

  for (int i = horizon - 1; i >= 0; --i) {
    const Eigen::MatrixXd& pn = solution.P[static_cast<std::size_t>(i) + 1];
    const Eigen::MatrixXd guu = problem.R + problem.B.transpose() * pn * problem.B;
    const Eigen::LLT<Eigen::MatrixXd> llt(guu);
    if (llt.info() != Eigen::Success) {
      throw InvalidArgumentError("control-cost block is not positive definite");
    }
    solution.K[static_cast<std::size_t>(i)] =
        llt.solve(problem.B.transpose() * pn * problem.A);
    const Eigen::MatrixXd& k = solution.K[static_cast<std::size_t>(i)];
    Eigen::MatrixXd p = problem.Q + problem.A.transpose() * pn * problem.A -
                        problem.A.transpose() * pn * problem.B * k;
    solution.P[static_cast<std::size_t>(i)] = 0.5 * (p + p.transpose());
  }

  solution.optimal_controls.resize(horizon, control_dim);
  Eigen::VectorXd x = problem.x0;
  for (int i = 0; i < horizon; ++i) {
    const Eigen::VectorXd u = -solution.K[static_cast<std::size_t>(i)] * x;
    solution.optimal_controls.row(i) = u.transpose();
    x = problem.A * x + problem.B * u;
  }
  solution.optimal_cost = 0.5 * problem.x0.dot(solution.P[0] * problem.x0);
  return solution;
}

Eigen::MatrixXd fd_cost_gradient(const Dynamics& f, const CostModel& cost,
                                 const Eigen::VectorXd& x0,
                                 const Eigen::MatrixXd& controls, double dt,
                                 double eps) {
  if (!(eps > 0.0)) throw InvalidArgumentError("eps must be positive");
  Eigen::MatrixXd grad(controls.rows(), controls.cols());
  Eigen::MatrixXd probe = controls;
  for (Eigen::Index i = 0; i < controls.rows(); ++i) {
    for (Eigen::Index j = 0; j < controls.cols(); ++j) {
      probe(i, j) = controls(i, j) + eps;
      const double up = total_cost(rollout(f, x0, probe, dt), cost);
      probe(i, j) = controls(i, j) - eps;
      const double down = total_cost(rollout(f, x0, probe, dt), cost);
      probe(i, j) = controls(i, j);
      grad(i, j) = (up - down) / (2.0 * eps);
    }
  }
  return grad;
}

namespace {

CheckResult check_update_against_dense_kkt(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 8);
    const int m = 1 + static_cast<int>(rng() % 8);
    const TangentMatrix tangents = make_orthonormal_tangents(n, rng());
    Eigen::MatrixXd approx(m, n);
    Eigen::VectorXd truth(m);
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < n; ++c) approx(r, c) = gauss(rng);
      truth(r) = gauss(rng);
    }
    const int column = static_cast<int>(rng() % static_cast<std::uint64_t>(n));

    const Eigen::MatrixXd fast = kkt_solve(approx, tangents, column, truth);
    const Eigen::MatrixXd dense = kkt_solve_dense(approx, tangents, column, truth);
    worst = std::max(worst, (fast - dense).cwiseAbs().maxCoeff());

    const double residual =
        (fast * tangents.columns.col(column) - truth).cwiseAbs().maxCoeff();
    const double residual_bound =
        1e-10 * (1.0 + truth.cwiseAbs().maxCoeff());
    if (residual > residual_bound) {
      CheckResult result;
      result.name = "constrained-update-vs-dense-kkt";
      result.passed = false;
      result.detail = format_bound("constraint residual", residual, residual_bound);
      return result;
    }
  }
  return bounded_check("constrained-update-vs-dense-kkt", worst, 1e-8);
}

CheckResult check_budget_mode_matches_differencing() {
  double worst = 0.0;
  std::int64_t call_gap = 0;
  for (const TaskSpec& task : builtin_tasks()) {
    const int horizon = 5;
    Eigen::MatrixXd controls =
        Eigen::MatrixXd::Zero(horizon, task.control_dim);
    for (int i = 0; i < horizon; ++i) {
      for (int j = 0; j < task.control_dim; ++j) {
        controls(i, j) = 0.05 * std::sin(0.7 * i + j);
      }
    }
    const Trajectory traj =
        rollout(task.dynamics, task.initial_state, controls, task.dt);

    DerivativeBackend fd = DerivativeBackend::finite_diff();
    WaspAxisSettings full;
    full.frac = 1.0;
    full.tol = 0.0;
    DerivativeBackend exhaustive = DerivativeBackend::wasp(
        task.state_dim, task.control_dim, horizon, full, full,
        kDefaultFdEpsilon, 0, /*identity_tangents=*/true);

    const ModelDerivatives fd_md = fd.compute(task.dynamics, traj);
    const ModelDerivatives wasp_md = exhaustive.compute(task.dynamics, traj);
    call_gap += std::abs(fd_md.dynamics_calls - wasp_md.dynamics_calls);
    for (int i = 0; i < horizon; ++i) {
      worst = std::max(worst, (fd_md.A[i] - wasp_md.A[i]).cwiseAbs().maxCoeff());
      worst = std::max(worst, (fd_md.B[i] - wasp_md.B[i]).cwiseAbs().maxCoeff());
    }
  }

  CheckResult result = bounded_check("budget-mode-matches-differencing",
                                     worst, 1e-12);
  if (call_gap != 0) {
    result.passed = false;
    result.detail += "; evaluation counts differ by " + std::to_string(call_gap);
  }
  return result;
}

CheckResult check_backward_gradient(std::uint64_t seed) {
  double worst = 0.0;
  for (const TaskSpec& task : builtin_tasks()) {
    const int horizon = 12;
    std::mt19937_64 rng(seed ^ std::hash<std::string>{}(task.name));
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd controls(horizon, task.control_dim);
    for (int i = 0; i < horizon; ++i) {
      for (int j = 0; j < task.control_dim; ++j) {
        controls(i, j) = 0.1 * gauss(rng);
      }
    }
    const Trajectory traj =
        rollout(task.dynamics, task.initial_state, controls, task.dt);

    // Exact per-step linearization removes one differencing layer, so the
    // only error left is the central-difference truncation of the probe.
    ModelDerivatives md;
    md.A.resize(horizon);
    md.B.resize(horizon);
    for (int i = 0; i < horizon; ++i) {
      task.jacobians(traj.states.row(i).transpose(),
                     traj.controls.row(i).transpose(), md.A[i], md.B[i]);
    }
    const CostDerivatives cd = cost_derivatives(traj, task.cost);
    const Eigen::MatrixXd adjoint = control_gradient(md, cd);
    const Eigen::MatrixXd differenced = fd_cost_gradient(
        task.dynamics, task.cost, task.initial_state, controls, task.dt, 1e-5);

    for (Eigen::Index i = 0; i < adjoint.rows(); ++i) {
      for (Eigen::Index j = 0; j < adjoint.cols(); ++j) {
        const double gap = std::abs(adjoint(i, j) - differenced(i, j)) /
                           (1.0 + std::abs(differenced(i, j)));
        worst = std::max(worst, gap);
      }
    }
  }
  return bounded_check("backward-gradient-vs-differenced-cost", worst, 1e-5);
}

CheckResult check_task_jacobians(std::uint64_t seed) {
  double worst = 0.0;
  for (const TaskSpec& task : builtin_tasks()) {
    worst = std::max(worst, max_jacobian_discrepancy(task, 25, seed));
  }
  return bounded_check("task-jacobians-match-differencing", worst, 1e-5);
}

CheckResult check_cost_derivatives(std::uint64_t seed) {
  double worst = 0.0;
  for (const TaskSpec& task : builtin_tasks()) {
    worst = std::max(worst, max_cost_derivative_discrepancy(task, 25, seed));
  }
  return bounded_check("cost-derivatives-match-differencing", worst, 1e-5);
}

}  // namespace

std::vector<CheckResult> run_verification(std::uint64_t seed) {
  std::vector<CheckResult> results;
  results.push_back(check_update_against_dense_kkt(seed + 1));
  results.push_back(check_budget_mode_matches_differencing());
  results.push_back(check_backward_gradient(seed + 2));
  results.push_back(check_task_jacobians(seed + 3));
  results.push_back(check_cost_derivatives(seed + 4));
  return results;
}

}  // namespace waspmpc::oracles
