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

#include "waspmpc/trajectory.hpp"

#include <string>
#include <utility>

#include "waspmpc/errors.hpp"

namespace waspmpc {

void Trajectory::validate() const {
  if (horizon < 1) {
    throw InvalidArgumentError("trajectory horizon must be >= 1, got " +
                               std::to_string(horizon));
  }
  if (states.rows() != horizon + 1) {
    throw InvalidArgumentError(
        "trajectory needs " + std::to_string(horizon + 1) + " states, got " +
        std::to_string(states.rows()));
  }
  if (controls.rows() != horizon) {
    throw InvalidArgumentError(
        "trajectory needs " + std::to_string(horizon) + " controls, got " +
        std::to_string(controls.rows()));
  }
  if (!states.allFinite() || !controls.allFinite()) {
    throw InvalidArgumentError("trajectory contains non-finite entries");
  }
}

Dynamics::Dynamics(int state_dim, int control_dim, StepFn step)
    : state_dim_(state_dim), control_dim_(control_dim), step_(std::move(step)) {
  if (state_dim_ < 1 || control_dim_ < 1) {
    throw InvalidArgumentError("dynamics dimensions must be >= 1, got " +
                               std::to_string(state_dim_) + "/" +
                               std::to_string(control_dim_));
  }
  if (!step_) {
    throw InvalidArgumentError("dynamics requires a step function");
  }
}

Eigen::VectorXd Dynamics::step(const Eigen::VectorXd& x,
                               const Eigen::VectorXd& u) const {
  calls_->fetch_add(1, std::memory_order_relaxed);
  return step_(x, u);
}

Trajectory rollout(const Dynamics& f, const Eigen::VectorXd& x0,
                   const Eigen::MatrixXd& controls, double dt) {
  if (x0.size() != f.state_dim()) {
    throw InvalidArgumentError("initial state dimension " +
                               std::to_string(x0.size()) +
                               " does not match dynamics state dimension " +
                               std::to_string(f.state_dim()));
  }
  if (controls.cols() != f.control_dim()) {
    throw InvalidArgumentError("control dimension " +
                               std::to_string(controls.cols()) +
                               " does not match dynamics control dimension " +
                               std::to_string(f.control_dim()));
  }
  const int horizon = static_cast<int>(controls.rows());
  if (horizon < 1) {
    throw InvalidArgumentError("rollout needs at least one control row");
  }
  Trajectory traj;
  traj.horizon = horizon;
  traj.dt = dt;
  traj.states.resize(horizon + 1, f.state_dim());
  traj.controls = controls;
  traj.states.row(0) = x0.transpose();
  Eigen::VectorXd x = x0;
  for (int i = 0; i < horizon; ++i) {
    x = f.step(x, controls.row(i).transpose());
    if (!x.allFinite()) {
      throw RolloutDivergedError(
          "rollout diverged: non-finite state after timestep " +
              std::to_string(i),
          i);
    }
    traj.states.row(i + 1) = x.transpose();
  }
  return traj;
}

}  // namespace waspmpc
