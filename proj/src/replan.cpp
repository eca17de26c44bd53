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

#include "waspmpc/replan.hpp"

#include <cmath>
#include <random>
#include <utility>

#include "waspmpc/errors.hpp"

namespace waspmpc {

double EpisodeTrace::total_executed_cost() const {
  double total = 0.0;
  for (const ReplanRecord& record : records) total += record.executed_cost;
  return total;
}

double EpisodeTrace::average_executed_cost() const {
  if (records.empty()) return 0.0;
  return total_executed_cost() / static_cast<double>(records.size());
}

EpisodeTrace replan_loop(const TaskSpec& task, const PlannerConfig& planner,
                         DerivativeBackend* backend, double sim_seconds,
                         const ReplanOptions& options) {
  planner.validate();
  if (!(sim_seconds > 0.0)) {
    throw InvalidArgumentError("sim_seconds must be positive");
  }
  const int steps = static_cast<int>(std::llround(sim_seconds / task.dt));
  if (steps < 1) {
    throw InvalidArgumentError("sim_seconds is shorter than one step");
  }
  if (planner_needs_backend(planner.kind)) {
    if (backend == nullptr) {
      throw InvalidArgumentError(planner_name(planner.kind) +
                                 " requires a derivative backend");
    }
    if (backend->is_wasp() && backend->horizon() != task.horizon) {
      throw InvalidArgumentError(
          "backend horizon does not match the task horizon");
    }
  }

  std::mt19937_64 rng(options.seed);
  EpisodeTrace trace;
  trace.records.reserve(static_cast<std::size_t>(steps));
  trace.executed_states.resize(steps + 1, task.state_dim);
  trace.executed_controls.resize(steps, task.control_dim);

  Eigen::VectorXd x = task.initial_state;
  trace.executed_states.row(0) = x.transpose();

  Trajectory warm;
  warm.horizon = task.horizon;
  warm.dt = task.dt;
  warm.controls = Eigen::MatrixXd::Zero(task.horizon, task.control_dim);
  warm.states = x.transpose().replicate(task.horizon + 1, 1);

  for (int k = 0; k < steps; ++k) {
    if (backend != nullptr && backend->is_wasp() &&
        options.reset_wasp_each_replan) {
      backend->reset();
    }

    PlanResult plan =
        plan_once(warm, task.dynamics, task.cost, backend, planner, rng);

    const Eigen::VectorXd u = plan.controls.row(0).transpose();
    ReplanRecord record;
    record.replan_index = k;
    record.planning_time_s = options.record_wall_time ? plan.planning_time_s : 0.0;
    record.md_time_s = options.record_wall_time ? plan.derivative_time_s : 0.0;
    record.dynamics_calls = plan.dynamics_calls + 1;
    record.md_dynamics_calls = plan.md_dynamics_calls;
    record.executed_cost = task.cost.stage(x, u);

    const Eigen::VectorXd next = task.dynamics.step(x, u);
    trace.executed_controls.row(k) = u.transpose();
    trace.records.push_back(record);
    if (!next.allFinite()) {
      trace.diverged = true;
      trace.executed_states.conservativeResize(k + 1, Eigen::NoChange);
      trace.executed_controls.conservativeResize(k + 1, Eigen::NoChange);
      break;
    }
    x = next;
    trace.executed_states.row(k + 1) = x.transpose();

    // Shift the warm start one step forward, repeating the final control;
    // the stale states only seed the next nominal rollout's start point.
    warm.states = plan.trajectory.states;
    warm.states.row(0) = x.transpose();
    warm.controls.topRows(task.horizon - 1) =
        plan.controls.bottomRows(task.horizon - 1);
    warm.controls.row(task.horizon - 1) = plan.controls.row(task.horizon - 1);
    if (backend != nullptr && backend->is_wasp() &&
        !options.reset_wasp_each_replan) {
      backend->shift_horizon();
    }
  }

  return trace;
}

}  // namespace waspmpc
