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

#include "waspmpc/cost.hpp"

#include <cmath>
#include <string>

#include "waspmpc/errors.hpp"

namespace waspmpc {

CostModel make_quadratic_cost(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                              const Eigen::MatrixXd& Qf,
                              const Eigen::VectorXd& x_ref,
                              const Eigen::VectorXd& u_ref) {
  if (Q.rows() != Q.cols() || R.rows() != R.cols() || Qf.rows() != Qf.cols()) {
    throw InvalidArgumentError("quadratic cost weights must be square");
  }
  if (Q.rows() != x_ref.size() || Qf.rows() != x_ref.size() ||
      R.rows() != u_ref.size()) {
    throw InvalidArgumentError(
        "quadratic cost weight dimensions do not match the references");
  }
  CostModel cost;
  cost.stage = [Q, R, x_ref, u_ref](const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& u) {
    const Eigen::VectorXd dx = x - x_ref;
    const Eigen::VectorXd du = u - u_ref;
    return 0.5 * dx.dot(Q * dx) + 0.5 * du.dot(R * du);
  };
  cost.terminal = [Qf, x_ref](const Eigen::VectorXd& x) {
    const Eigen::VectorXd dx = x - x_ref;
    return 0.5 * dx.dot(Qf * dx);
  };
  cost.stage_grad_x = [Q, x_ref](const Eigen::VectorXd& x,
                                 const Eigen::VectorXd&) -> Eigen::VectorXd {
    return Q * (x - x_ref);
  };
  cost.stage_grad_u = [R, u_ref](const Eigen::VectorXd&,
                                 const Eigen::VectorXd& u) -> Eigen::VectorXd {
    return R * (u - u_ref);
  };
  cost.stage_hess_xx = [Q](const Eigen::VectorXd&,
                           const Eigen::VectorXd&) { return Q; };
  cost.stage_hess_uu = [R](const Eigen::VectorXd&,
                           const Eigen::VectorXd&) { return R; };
  cost.stage_hess_ux = [Q, R](const Eigen::VectorXd&,
                              const Eigen::VectorXd&) -> Eigen::MatrixXd {
    return Eigen::MatrixXd::Zero(R.rows(), Q.rows());
  };
  cost.terminal_grad = [Qf, x_ref](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return Qf * (x - x_ref);
  };
  cost.terminal_hess = [Qf](const Eigen::VectorXd&) { return Qf; };
  return cost;
}

double total_cost(const Trajectory& traj, const CostModel& cost) {
  traj.validate();
  double total = 0.0;
  for (int i = 0; i < traj.horizon; ++i) {
    total += cost.stage(traj.states.row(i).transpose(),
                        traj.controls.row(i).transpose());
  }
  total += cost.terminal(traj.states.row(traj.horizon).transpose());
  if (!std::isfinite(total)) {
    throw NonFiniteError("non-finite trajectory cost");
  }
  return total;
}

CostDerivatives cost_derivatives(const Trajectory& traj, const CostModel& cost) {
  traj.validate();
  const int T = traj.horizon;
  const auto dx = traj.states.cols();
  const auto du = traj.controls.cols();
  CostDerivatives out;
  out.lx.resize(T, dx);
  out.lu.resize(T, du);
  out.lxx.reserve(T);
  out.luu.reserve(T);
  out.lux.reserve(T);
  for (int i = 0; i < T; ++i) {
    const Eigen::VectorXd x = traj.states.row(i).transpose();
    const Eigen::VectorXd u = traj.controls.row(i).transpose();
    out.lx.row(i) = cost.stage_grad_x(x, u).transpose();
    out.lu.row(i) = cost.stage_grad_u(x, u).transpose();
    out.lxx.push_back(cost.stage_hess_xx(x, u));
    out.luu.push_back(cost.stage_hess_uu(x, u));
    out.lux.push_back(cost.stage_hess_ux(x, u));
  }
  const Eigen::VectorXd xT = traj.states.row(T).transpose();
  out.terminal_grad = cost.terminal_grad(xT);
  out.terminal_hess = cost.terminal_hess(xT);
  return out;
}

}  // namespace waspmpc
