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

#ifndef WASPMPC_TRAJECTORY_HPP_
#define WASPMPC_TRAJECTORY_HPP_

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>

#include <Eigen/Core>

namespace waspmpc {

// Discrete-time control problem data over a horizon of T steps: T+1 states
// stacked as rows and T controls stacked as rows.
struct Trajectory {
  int horizon = 0;  // T
  double dt = 0.0;
  Eigen::MatrixXd states;    // (T+1) x state_dim
  Eigen::MatrixXd controls;  // T x control_dim

  Eigen::VectorXd initial_state() const { return states.row(0).transpose(); }

  // Throws InvalidArgumentError on shape mismatch or non-finite entries.
  void validate() const;
};

// Discrete one-step transition function plus dimensions. Copies share a
// single evaluation counter, so every call made through any copy is
// attributed to the same model. step() must be pure; it may be invoked
// from several threads at once.
class Dynamics {
 public:
  using StepFn =
      std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

  Dynamics() = default;
  Dynamics(int state_dim, int control_dim, StepFn step);

  Eigen::VectorXd step(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const;

  int state_dim() const { return state_dim_; }
  int control_dim() const { return control_dim_; }
  std::int64_t calls() const { return calls_->load(std::memory_order_relaxed); }

 private:
  int state_dim_ = 0;
  int control_dim_ = 0;
  StepFn step_;
  std::shared_ptr<std::atomic<std::int64_t>> calls_ =
      std::make_shared<std::atomic<std::int64_t>>(0);
};

// Iterates the dynamics from x0 under the given control rows. Performs
// exactly controls.rows() evaluations. Throws RolloutDivergedError naming
// the first timestep whose successor state is non-finite.
Trajectory rollout(const Dynamics& f, const Eigen::VectorXd& x0,
                   const Eigen::MatrixXd& controls, double dt);

}  // namespace waspmpc

#endif  // WASPMPC_TRAJECTORY_HPP_
