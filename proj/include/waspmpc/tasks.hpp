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

#ifndef WASPMPC_TASKS_HPP_
#define WASPMPC_TASKS_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "waspmpc/cost.hpp"
#include "waspmpc/trajectory.hpp"

namespace waspmpc {

// One closed-loop control problem: dynamics, cost, horizon, start state,
// and exact Jacobians of the step function for verification. Dynamics and
// jacobians are pure functions of their arguments.
struct TaskSpec {
  std::string name;
  int state_dim = 0;
  int control_dim = 0;
  double dt = 0.01;
  int horizon = 50;
  Dynamics dynamics;
  // A = d step / d x (state_dim x state_dim), B = d step / d u
  // (state_dim x control_dim), both at (x, u).
  std::function<void(const Eigen::VectorXd&, const Eigen::VectorXd&,
                     Eigen::MatrixXd&, Eigen::MatrixXd&)>
      jacobians;
  CostModel cost;
  Eigen::VectorXd initial_state;
  double probe_scale = 0.7;       // stddev for self-test probe points
  double noise_scale = 0.3;       // suggested sampling-planner stddev
  double success_cost = 1e300;    // episode avg executed cost threshold
  bool benchmark = false;         // state_dim + control_dim >= 10
};

// Linear plant data used both to build the LQ task and by the Riccati
// reference solution.
struct LqProblem {
  Eigen::MatrixXd A, B, Q, R, Qf;
  Eigen::VectorXd x0;
  double dt = 0.01;
  int horizon = 50;
};

LqProblem default_lq_problem(int state_dim, int control_dim, int horizon,
                             std::uint64_t seed = 1234);

TaskSpec make_lq_task(const LqProblem& problem);
TaskSpec make_pendulum_task();
TaskSpec make_cartpole_task();
TaskSpec make_quadrotor_task();
TaskSpec make_chain_task();
// Cartpole with a one-sided spring wall acting on the cart. Stress
// variant; excluded from headline comparisons.
TaskSpec make_cartpole_wall_task();

const std::vector<TaskSpec>& builtin_tasks();
std::vector<std::string> task_names();
// Throws InvalidArgumentError listing the valid names.
const TaskSpec& find_task(const std::string& name);

// Largest guarded relative error between the task's analytic Jacobians
// and central finite differences of its step function, over seeded random
// probe points. Guarded: |a - b| / (1 + |a|), checked entrywise.
double max_jacobian_discrepancy(const TaskSpec& task, int num_points,
                                std::uint64_t seed);

// Same idea for the cost callbacks: analytic gradients against central
// differences of the values, analytic Hessians against central
// differences of the gradients, plus a symmetry check on the Hessians.
double max_cost_derivative_discrepancy(const TaskSpec& task, int num_points,
                                       std::uint64_t seed);

}  // namespace waspmpc

#endif  // WASPMPC_TASKS_HPP_
