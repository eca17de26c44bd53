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

#ifndef WASPMPC_COST_HPP_
#define WASPMPC_COST_HPP_

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "waspmpc/trajectory.hpp"

namespace waspmpc {

// Additive trajectory cost: sum of stage terms plus a terminal term.
// Analytic first and second derivatives are part of the contract; all
// Hessians must be symmetric (stage_hess_ux is control_dim x state_dim).
struct CostModel {
  std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)> stage;
  std::function<double(const Eigen::VectorXd&)> terminal;

  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>
      stage_grad_x;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>
      stage_grad_u;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>
      stage_hess_xx;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>
      stage_hess_uu;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>
      stage_hess_ux;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> terminal_grad;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> terminal_hess;
};

// 1/2 (x - x_ref)' Q (x - x_ref) + 1/2 (u - u_ref)' R (u - u_ref) per
// stage, 1/2 (x - x_ref)' Qf (x - x_ref) at the end.
CostModel make_quadratic_cost(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                              const Eigen::MatrixXd& Qf,
                              const Eigen::VectorXd& x_ref,
                              const Eigen::VectorXd& u_ref);

double total_cost(const Trajectory& traj, const CostModel& cost);

// Cost expansion along a trajectory: per-stage gradients stacked as rows,
// per-stage Hessians as vectors of matrices, plus the terminal expansion.
struct CostDerivatives {
  Eigen::MatrixXd lx;  // T x state_dim
  Eigen::MatrixXd lu;  // T x control_dim
  std::vector<Eigen::MatrixXd> lxx;
  std::vector<Eigen::MatrixXd> luu;
  std::vector<Eigen::MatrixXd> lux;
  Eigen::VectorXd terminal_grad;
  Eigen::MatrixXd terminal_hess;
};

CostDerivatives cost_derivatives(const Trajectory& traj, const CostModel& cost);

}  // namespace waspmpc

#endif  // WASPMPC_COST_HPP_
