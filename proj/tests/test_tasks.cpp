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

#include "waspmpc/tasks.hpp"

#include <string>
#include <vector>

#include "doctest.h"
#include "waspmpc/errors.hpp"
#include "waspmpc/oracles.hpp"

using waspmpc::InvalidArgumentError;
using waspmpc::LqProblem;
using waspmpc::TaskSpec;
using waspmpc::builtin_tasks;
using waspmpc::default_lq_problem;
using waspmpc::find_task;
using waspmpc::task_names;

TEST_CASE("the builtin registry is stable and complete") {
  const std::vector<std::string> names = task_names();
  const std::vector<std::string> expected = {
      "lq", "pendulum", "cartpole", "quadrotor", "chain", "cartpole_wall"};
  REQUIRE(names == expected);
  // The registry hands out the same storage on every call.
  CHECK(&builtin_tasks() == &builtin_tasks());
  CHECK(&find_task("chain") == &find_task("chain"));
}

TEST_CASE("unknown task names fail with the valid list") {
  try {
    (void)find_task("does_not_exist");
    FAIL("expected a lookup failure");
  } catch (const InvalidArgumentError& e) {
    const std::string what = e.what();
    CHECK(what.find("does_not_exist") != std::string::npos);
    for (const std::string& name : task_names()) {
      CHECK(what.find(name) != std::string::npos);
    }
  }
}

TEST_CASE("task shapes, steps, and flags") {
  for (const TaskSpec& task : builtin_tasks()) {
    CAPTURE(task.name);
    CHECK(task.dt == 0.01);
    CHECK(task.horizon == 50);
    CHECK(task.state_dim >= 1);
    CHECK(task.control_dim >= 1);
    CHECK(task.initial_state.size() == task.state_dim);
    CHECK(task.probe_scale > 0.0);
    CHECK(task.noise_scale > 0.0);
    CHECK(task.success_cost > 0.0);
    CHECK(task.benchmark == (task.state_dim + task.control_dim >= 10));

    const Eigen::VectorXd u = Eigen::VectorXd::Zero(task.control_dim);
    const Eigen::VectorXd next = task.dynamics.step(task.initial_state, u);
    CHECK(next.size() == task.state_dim);
    CHECK(next.allFinite());
    // The model is a pure function of its inputs.
    CHECK((task.dynamics.step(task.initial_state, u) - next)
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }
  CHECK(find_task("chain").state_dim == 16);
  CHECK(find_task("chain").control_dim == 8);
  CHECK(find_task("chain").benchmark);
  CHECK(find_task("lq").benchmark);
  CHECK_FALSE(find_task("pendulum").benchmark);
  CHECK_FALSE(find_task("cartpole").benchmark);
  CHECK_FALSE(find_task("quadrotor").benchmark);
  CHECK_FALSE(find_task("cartpole_wall").benchmark);
}

TEST_CASE("analytic jacobians track differencing on every task") {
  for (const TaskSpec& task : builtin_tasks()) {
    CAPTURE(task.name);
    CHECK(waspmpc::max_jacobian_discrepancy(task, 100, 5) <= 1e-5);
  }
}

TEST_CASE("cost gradients and hessians track differencing on every task") {
  for (const TaskSpec& task : builtin_tasks()) {
    CAPTURE(task.name);
    CHECK(waspmpc::max_cost_derivative_discrepancy(task, 100, 5) <= 1e-5);
  }
}

TEST_CASE("the hanging pendulum stays put without torque") {
  const TaskSpec& task = find_task("pendulum");
  const Eigen::VectorXd rest = Eigen::VectorXd::Zero(2);
  const Eigen::VectorXd next =
      task.dynamics.step(rest, Eigen::VectorXd::Zero(1));
  CHECK(next.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("the wall variant differs from the plain cartpole only past the wall") {
  const TaskSpec& plain = find_task("cartpole");
  const TaskSpec& walled = find_task("cartpole_wall");
  CHECK(plain.state_dim == walled.state_dim);
  CHECK(plain.control_dim == walled.control_dim);
  CHECK((plain.initial_state - walled.initial_state).cwiseAbs().maxCoeff() ==
        0.0);

  Eigen::VectorXd inside(4);
  inside << 0.1, 0.3, 0.2, -0.1;
  Eigen::VectorXd outside(4);
  outside << 0.6, 0.3, 0.2, -0.1;
  Eigen::VectorXd u(1);
  u << 1.0;

  CHECK((plain.dynamics.step(inside, u) - walled.dynamics.step(inside, u))
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK((plain.dynamics.step(outside, u) - walled.dynamics.step(outside, u))
            .cwiseAbs()
            .maxCoeff() > 0.0);
}

TEST_CASE("the default linear plant is well posed") {
  const LqProblem problem = default_lq_problem(8, 4, 50);
  CHECK(problem.A.rows() == 8);
  CHECK(problem.B.cols() == 4);
  CHECK(problem.horizon == 50);
  // Contractive open loop keeps rollouts bounded over any horizon.
  CHECK(problem.A.eigenvalues().cwiseAbs().maxCoeff() < 1.0);
  // The same seed reproduces the same plant.
  const LqProblem again = default_lq_problem(8, 4, 50);
  CHECK((problem.A - again.A).cwiseAbs().maxCoeff() == 0.0);
  CHECK((problem.x0 - again.x0).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(default_lq_problem(0, 1, 10), InvalidArgumentError);
  CHECK_THROWS_AS(default_lq_problem(2, 0, 10), InvalidArgumentError);
  CHECK_THROWS_AS(default_lq_problem(2, 1, 0), InvalidArgumentError);

  // The registry's linear task is built from exactly this plant.
  const TaskSpec& lq = find_task("lq");
  CHECK(lq.state_dim == 8);
  CHECK(lq.control_dim == 4);
  const Eigen::VectorXd step =
      lq.dynamics.step(problem.x0, Eigen::VectorXd::Zero(4));
  CHECK((step - problem.A * problem.x0).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("the linear task reaches the optimal cost oracle") {
  const LqProblem problem = default_lq_problem(4, 2, 30);
  const waspmpc::oracles::LqrSolution lqr =
      waspmpc::oracles::solve_finite_horizon_lqr(problem);
  const TaskSpec task = waspmpc::make_lq_task(problem);
  const waspmpc::Trajectory traj = waspmpc::rollout(
      task.dynamics, task.initial_state, lqr.optimal_controls, task.dt);
  const double rolled = waspmpc::total_cost(traj, task.cost);
  CHECK(rolled == doctest::Approx(lqr.optimal_cost).epsilon(1e-10));
}
