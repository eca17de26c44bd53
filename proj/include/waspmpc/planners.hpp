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

#ifndef WASPMPC_PLANNERS_HPP_
#define WASPMPC_PLANNERS_HPP_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "waspmpc/cost.hpp"
#include "waspmpc/model_derivatives.hpp"
#include "waspmpc/trajectory.hpp"

namespace waspmpc {

enum class PlannerKind : std::uint8_t {
  kGradientDescent,
  kIlqg,
  kPredictiveSampling,
  kRobustSampling,
  kCrossEntropy,
  kSampleGradient,
};

std::string planner_name(PlannerKind kind);
// Throws InvalidArgumentError listing the valid names.
PlannerKind planner_from_name(const std::string& name);
bool planner_needs_backend(PlannerKind kind);

struct LineSearchParams {
  double alpha_init = 1.0;
  double shrink = 0.5;
  int max_backtracks = 10;
};

struct RegularizationParams {
  double mu_init = 1e-8;
  double mu_up = 10.0;
  double mu_down = 0.1;
  double mu_min = 1e-10;
  double mu_max = 1e8;
};

struct SamplingParams {
  int num_samples = 32;       // candidate count, nominal included
  double noise_scale = 0.3;   // exploration stddev
  int elite_count = 8;        // cross-entropy refit set
  double smoothing = 0.5;     // cross-entropy mean/std retention
  double temperature_scale = 0.1;  // exponential weighting bandwidth factor
  double gradient_sigma = 0.05;    // smoothing radius of the paired estimator
};

struct PlannerConfig {
  PlannerKind kind = PlannerKind::kIlqg;
  int iterations = 1;  // optimizer passes per plan call
  LineSearchParams line_search;
  RegularizationParams regularization;
  SamplingParams sampling;
  int threads = 0;

  void validate() const;
};

struct PlanResult {
  Eigen::MatrixXd controls;  // horizon x control_dim
  Trajectory trajectory;     // rollout of `controls`
  double cost = 0.0;
  double planning_time_s = 0.0;
  double derivative_time_s = 0.0;       // model-derivative share
  std::int64_t dynamics_calls = 0;      // all evaluations in this call
  std::int64_t md_dynamics_calls = 0;   // model-derivative share
  bool degraded = false;  // optimizer gave up (e.g. regularization ceiling)
};

// Backward-pass gradient of the total cost with respect to every control
// row, from the per-timestep linearization and the cost expansion.
Eigen::MatrixXd control_gradient(const ModelDerivatives& md,
                                 const CostDerivatives& cd);

// First-order planner: backward-pass gradient plus a backtracking line
// search that only ever accepts a strict cost decrease.
PlanResult gd_plan(const Trajectory& warm_start, const Dynamics& f,
                   const CostModel& cost, DerivativeBackend& backend,
                   const PlannerConfig& config);

// Gauss-Newton trajectory optimizer: Riccati-style backward pass on the
// linearized dynamics with a Levenberg shift on the control block, then a
// feedback forward pass with backtracking on the feedforward step.
PlanResult ilqg_plan(const Trajectory& warm_start, const Dynamics& f,
                     const CostModel& cost, DerivativeBackend& backend,
                     const PlannerConfig& config);

// Gaussian perturbations of the warm start with the nominal kept as
// candidate 0; returns the lowest-cost candidate.
PlanResult predictive_sampling_plan(const Trajectory& warm_start,
                                    const Dynamics& f, const CostModel& cost,
                                    const PlannerConfig& config,
                                    std::mt19937_64& rng);

// Exponentially tilted average of the candidates (bandwidth scaled to the
// cost spread); falls back to the best candidate if the average does not
// beat it.
PlanResult robust_sampling_plan(const Trajectory& warm_start, const Dynamics& f,
                                const CostModel& cost,
                                const PlannerConfig& config,
                                std::mt19937_64& rng);

// Iterative elite refit with mean/std smoothing; keeps and returns the
// best candidate ever evaluated.
PlanResult cem_plan(const Trajectory& warm_start, const Dynamics& f,
                    const CostModel& cost, const PlannerConfig& config,
                    std::mt19937_64& rng);

// Smoothed zeroth-order gradient estimate (antithetic pairs) followed by
// the same backtracking line search as gd_plan.
PlanResult sample_gradient_plan(const Trajectory& warm_start, const Dynamics& f,
                                const CostModel& cost,
                                const PlannerConfig& config,
                                std::mt19937_64& rng);

// Candidate batch around `nominal`: entry 0 is the nominal itself, the
// rest add i.i.d. Gaussian noise scaled per entry by `stddev`.
std::vector<Eigen::MatrixXd> sample_control_batch(const Eigen::MatrixXd& nominal,
                                                  const Eigen::MatrixXd& stddev,
                                                  int num_samples,
                                                  std::mt19937_64& rng);

// Antithetic-pair gradient estimate of a control-sequence objective:
// mean over pairs of (J(U + sigma xi) - J(U - sigma xi)) / (2 sigma) * xi.
Eigen::MatrixXd zeroth_order_gradient(
    const std::function<double(const Eigen::MatrixXd&)>& objective,
    const Eigen::MatrixXd& controls, double sigma, int pairs,
    std::mt19937_64& rng);

// Single dispatch used by the replanning loop. `backend` may be null for
// sampling planners; derivative planners require it.
PlanResult plan_once(const Trajectory& warm_start, const Dynamics& f,
                     const CostModel& cost, DerivativeBackend* backend,
                     const PlannerConfig& config, std::mt19937_64& rng);

}  // namespace waspmpc

#endif  // WASPMPC_PLANNERS_HPP_
