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

#ifndef WASPMPC_REPLAN_HPP_
#define WASPMPC_REPLAN_HPP_

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "waspmpc/model_derivatives.hpp"
#include "waspmpc/planners.hpp"
#include "waspmpc/tasks.hpp"

namespace waspmpc {

// Accounting for one replanning cycle: plan once from the current state,
// execute the first planned control, advance the simulation one step.
// dynamics_calls covers the whole cycle (planning plus the execution
// step); md_dynamics_calls and md_time_s are the model-derivative share.
struct ReplanRecord {
  int replan_index = 0;
  double planning_time_s = 0.0;
  double md_time_s = 0.0;
  std::int64_t dynamics_calls = 0;
  std::int64_t md_dynamics_calls = 0;
  double executed_cost = 0.0;  // stage cost of the executed (x, u) pair
};

struct EpisodeTrace {
  std::vector<ReplanRecord> records;
  Eigen::MatrixXd executed_states;    // (steps+1) x state_dim
  Eigen::MatrixXd executed_controls;  // steps x control_dim
  bool diverged = false;  // simulation hit a non-finite state and stopped

  double total_executed_cost() const;
  double average_executed_cost() const;
};

struct ReplanOptions {
  std::uint64_t seed = 0;  // sampling-planner random stream
  // Drop all persisted approximation state before every cycle instead of
  // shifting it along the horizon.
  bool reset_wasp_each_replan = false;
  // When false, the wall-time fields are reported as zero so runs can be
  // compared byte for byte.
  bool record_wall_time = true;
};

// Receding-horizon simulation of `task` for round(sim_seconds / dt)
// cycles. The warm start shifts forward one step per cycle with the last
// control row repeated. `backend` may be null for sampling planners.
EpisodeTrace replan_loop(const TaskSpec& task, const PlannerConfig& planner,
                         DerivativeBackend* backend, double sim_seconds,
                         const ReplanOptions& options);

}  // namespace waspmpc

#endif  // WASPMPC_REPLAN_HPP_
