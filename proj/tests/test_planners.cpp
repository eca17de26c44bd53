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

#include "waspmpc/planners.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "waspmpc/errors.hpp"
#include "waspmpc/model_derivatives.hpp"
#include "waspmpc/oracles.hpp"
#include "waspmpc/tasks.hpp"

using waspmpc::CostDerivatives;
using waspmpc::DerivativeBackend;
using waspmpc::InvalidArgumentError;
using waspmpc::LqProblem;
using waspmpc::ModelDerivatives;
using waspmpc::PlanResult;
using waspmpc::PlannerConfig;
using waspmpc::PlannerKind;
using waspmpc::TaskSpec;
using waspmpc::Trajectory;
using waspmpc::WaspAxisSettings;
using waspmpc::control_gradient;
using waspmpc::cost_derivatives;
using waspmpc::default_lq_problem;
using waspmpc::planner_from_name;
using waspmpc::planner_name;
using waspmpc::planner_needs_backend;
using waspmpc::rollout;
using waspmpc::total_cost;

namespace {

Trajectory zero_warm(const TaskSpec& task) {
  return rollout(task.dynamics, task.initial_state,
                 Eigen::MatrixXd::Zero(task.horizon, task.control_dim),
                 task.dt);
}

Eigen::MatrixXd seeded_controls(int rows, int cols, double scale,
                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, scale);
  Eigen::MatrixXd u(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) u(i, j) = gauss(rng);
  }
  return u;
}

}  // namespace

TEST_CASE("planner names round-trip and classify") {
  for (const PlannerKind kind :
       {PlannerKind::kGradientDescent, PlannerKind::kIlqg,
        PlannerKind::kPredictiveSampling, PlannerKind::kRobustSampling,
        PlannerKind::kCrossEntropy, PlannerKind::kSampleGradient}) {
    CHECK(planner_from_name(planner_name(kind)) == kind);
  }
  CHECK(planner_needs_backend(PlannerKind::kGradientDescent));
  CHECK(planner_needs_backend(PlannerKind::kIlqg));
  CHECK_FALSE(planner_needs_backend(PlannerKind::kCrossEntropy));
  CHECK_THROWS_AS(planner_from_name("newton"), InvalidArgumentError);
}

TEST_CASE("planner configuration validation") {
  PlannerConfig good;
  good.validate();

  const auto broken = [](auto&& mutate) {
    PlannerConfig config;
    mutate(config);
    CHECK_THROWS_AS(config.validate(), InvalidArgumentError);
  };
  broken([](PlannerConfig& c) { c.iterations = 0; });
  broken([](PlannerConfig& c) { c.line_search.alpha_init = 0.0; });
  broken([](PlannerConfig& c) { c.line_search.shrink = 1.0; });
  broken([](PlannerConfig& c) { c.line_search.max_backtracks = -1; });
  broken([](PlannerConfig& c) { c.regularization.mu_init = 0.0; });
  broken([](PlannerConfig& c) { c.regularization.mu_up = 1.0; });
  broken([](PlannerConfig& c) { c.regularization.mu_down = 1.0; });
  broken([](PlannerConfig& c) { c.sampling.num_samples = 0; });
  broken([](PlannerConfig& c) { c.sampling.elite_count = 0; });
  broken([](PlannerConfig& c) {
    c.sampling.num_samples = 8;
    c.sampling.elite_count = 9;
  });
  broken([](PlannerConfig& c) { c.sampling.smoothing = 1.5; });
  broken([](PlannerConfig& c) { c.sampling.noise_scale = -0.1; });
  broken([](PlannerConfig& c) { c.sampling.temperature_scale = 0.0; });
  broken([](PlannerConfig& c) { c.sampling.gradient_sigma = 0.0; });
  broken([](PlannerConfig& c) { c.threads = -1; });
}

TEST_CASE("adjoint control gradient matches differencing the episode cost") {
  const TaskSpec task = waspmpc::make_lq_task(default_lq_problem(4, 2, 20));
  const Eigen::MatrixXd controls = seeded_controls(20, 2, 0.3, 17);
  const Trajectory traj =
      rollout(task.dynamics, task.initial_state, controls, task.dt);

  ModelDerivatives md;
  md.A.resize(20);
  md.B.resize(20);
  for (int i = 0; i < 20; ++i) {
    task.jacobians(traj.states.row(i).transpose(),
                   traj.controls.row(i).transpose(), md.A[i], md.B[i]);
  }
  const CostDerivatives cd = cost_derivatives(traj, task.cost);
  const Eigen::MatrixXd adjoint = control_gradient(md, cd);
  const Eigen::MatrixXd differenced = waspmpc::oracles::fd_cost_gradient(
      task.dynamics, task.cost, task.initial_state, controls, task.dt);

  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 2; ++j) {
      worst = std::max(worst, std::abs(adjoint(i, j) - differenced(i, j)) /
                                  (1.0 + std::abs(differenced(i, j))));
    }
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("gradient descent reduces the cost and stalls at the optimum") {
  const TaskSpec task = waspmpc::make_lq_task(default_lq_problem(4, 2, 20));
  DerivativeBackend backend = DerivativeBackend::finite_diff();
  PlannerConfig config;
  config.kind = PlannerKind::kGradientDescent;
  config.iterations = 3;

  const Trajectory warm = zero_warm(task);
  const double warm_cost = total_cost(warm, task.cost);
  const PlanResult result = gd_plan(warm, task.dynamics, task.cost, backend,
                                    config);
  CHECK(result.cost < warm_cost);
  CHECK(result.dynamics_calls > 0);
  CHECK(result.md_dynamics_calls > 0);
  CHECK(result.dynamics_calls > result.md_dynamics_calls);

  // From the exact optimum there is no strictly improving step.
  const waspmpc::oracles::LqrSolution lqr =
      waspmpc::oracles::solve_finite_horizon_lqr(default_lq_problem(4, 2, 20));
  Trajectory optimal = rollout(task.dynamics, task.initial_state,
                               lqr.optimal_controls, task.dt);
  const double opt_cost = total_cost(optimal, task.cost);
  const PlanResult stalled =
      gd_plan(optimal, task.dynamics, task.cost, backend, config);
  CHECK(stalled.cost <= opt_cost + 1e-12);
  CHECK(stalled.cost >= opt_cost - 1e-9 * (1.0 + opt_cost));
}

TEST_CASE("one feedback iteration solves the linear-quadratic problem") {
  const LqProblem problem = default_lq_problem(4, 2, 10);
  const TaskSpec task = waspmpc::make_lq_task(problem);
  const waspmpc::oracles::LqrSolution lqr =
      waspmpc::oracles::solve_finite_horizon_lqr(problem);

  DerivativeBackend backend = DerivativeBackend::finite_diff();
  PlannerConfig config;
  config.kind = PlannerKind::kIlqg;
  config.iterations = 1;

  const PlanResult result =
      ilqg_plan(zero_warm(task), task.dynamics, task.cost, backend, config);
  CHECK_FALSE(result.degraded);
  CHECK(std::abs(result.cost - lqr.optimal_cost) <=
        1e-6 * (1.0 + std::abs(lqr.optimal_cost)));

  // Replanning from the optimum must not move away from it.
  Trajectory optimal = rollout(task.dynamics, task.initial_state,
                               lqr.optimal_controls, task.dt);
  const double opt_cost = total_cost(optimal, task.cost);
  const PlanResult settled =
      ilqg_plan(optimal, task.dynamics, task.cost, backend, config);
  CHECK(settled.cost <= opt_cost + 1e-12);
  CHECK(opt_cost - settled.cost <= 1e-10 * (1.0 + opt_cost));
}

TEST_CASE("feedback planning improves the cartpole with either backend") {
  const TaskSpec task = waspmpc::find_task("cartpole");
  PlannerConfig config;
  config.kind = PlannerKind::kIlqg;
  config.iterations = 1;
  const Trajectory warm = zero_warm(task);
  const double warm_cost = total_cost(warm, task.cost);

  DerivativeBackend fd = DerivativeBackend::finite_diff();
  const PlanResult fd_result =
      ilqg_plan(warm, task.dynamics, task.cost, fd, config);
  CHECK(fd_result.cost < warm_cost);

  WaspAxisSettings axis;
  DerivativeBackend wasp = DerivativeBackend::wasp(
      task.state_dim, task.control_dim, task.horizon, axis, axis);
  // Warm the web so the reduced probe budget is actually exercised.
  const PlanResult first =
      ilqg_plan(warm, task.dynamics, task.cost, wasp, config);
  const PlanResult wasp_result =
      ilqg_plan(warm, task.dynamics, task.cost, wasp, config);
  CHECK(wasp_result.cost < warm_cost);
  CHECK(wasp_result.cost <= 1.3 * fd_result.cost);
  CHECK(wasp_result.md_dynamics_calls < fd_result.md_dynamics_calls);
  CHECK(first.md_dynamics_calls == fd_result.md_dynamics_calls);
}

TEST_CASE("an indefinite control hessian degrades instead of crashing") {
  const TaskSpec base = waspmpc::find_task("pendulum");
  waspmpc::CostModel hostile = base.cost;
  hostile.stage_hess_uu = [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
    return Eigen::MatrixXd(-1e9 * Eigen::MatrixXd::Identity(1, 1));
  };

  DerivativeBackend backend = DerivativeBackend::finite_diff();
  PlannerConfig config;
  config.kind = PlannerKind::kIlqg;
  const Trajectory warm = zero_warm(base);
  const PlanResult result =
      ilqg_plan(warm, base.dynamics, hostile, backend, config);
  CHECK(result.degraded);
  CHECK((result.controls - warm.controls).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("zero exploration noise keeps the nominal exactly") {
  const TaskSpec task = waspmpc::find_task("pendulum");
  const Trajectory warm = zero_warm(task);
  const double warm_cost = total_cost(warm, task.cost);

  PlannerConfig config;
  config.sampling.num_samples = 8;
  config.sampling.elite_count = 4;
  config.sampling.noise_scale = 0.0;
  std::mt19937_64 rng(4);

  config.kind = PlannerKind::kPredictiveSampling;
  const PlanResult ps =
      predictive_sampling_plan(warm, task.dynamics, task.cost, config, rng);
  CHECK(ps.cost == warm_cost);
  CHECK((ps.controls - warm.controls).cwiseAbs().maxCoeff() == 0.0);

  config.kind = PlannerKind::kCrossEntropy;
  const PlanResult cem =
      cem_plan(warm, task.dynamics, task.cost, config, rng);
  CHECK(cem.cost == warm_cost);
  CHECK((cem.controls - warm.controls).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sampling planners never fall below the warm start") {
  const TaskSpec task = waspmpc::find_task("pendulum");
  const Trajectory warm = zero_warm(task);
  const double warm_cost = total_cost(warm, task.cost);

  PlannerConfig config;
  config.iterations = 2;
  config.sampling.num_samples = 16;
  config.sampling.elite_count = 4;
  config.sampling.noise_scale = task.noise_scale;

  using Planner = PlanResult (*)(const Trajectory&, const waspmpc::Dynamics&,
                                 const waspmpc::CostModel&,
                                 const PlannerConfig&, std::mt19937_64&);
  const Planner planners[] = {
      &waspmpc::predictive_sampling_plan, &waspmpc::robust_sampling_plan,
      &waspmpc::cem_plan, &waspmpc::sample_gradient_plan};
  for (const Planner plan : planners) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      std::mt19937_64 rng(seed);
      const PlanResult result =
          plan(warm, task.dynamics, task.cost, config, rng);
      CHECK(result.cost <= warm_cost + 1e-12);
      CHECK(result.md_dynamics_calls == 0);
      CHECK(result.dynamics_calls > 0);
    }
  }
}

TEST_CASE("sampling planners are deterministic in the seed") {
  const TaskSpec task = waspmpc::find_task("pendulum");
  const Trajectory warm = zero_warm(task);
  PlannerConfig config;
  config.sampling.num_samples = 8;
  config.sampling.noise_scale = 0.5;
  config.sampling.elite_count = 4;
  config.kind = PlannerKind::kPredictiveSampling;

  std::mt19937_64 rng_a(9);
  std::mt19937_64 rng_b(9);
  std::mt19937_64 rng_c(10);
  const PlanResult a =
      predictive_sampling_plan(warm, task.dynamics, task.cost, config, rng_a);
  const PlanResult b =
      predictive_sampling_plan(warm, task.dynamics, task.cost, config, rng_b);
  const PlanResult c =
      predictive_sampling_plan(warm, task.dynamics, task.cost, config, rng_c);
  CHECK(a.cost == b.cost);
  CHECK((a.controls - b.controls).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.controls - c.controls).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("control batches start at the nominal") {
  const Eigen::MatrixXd nominal = seeded_controls(6, 2, 1.0, 23);
  const Eigen::MatrixXd stddev = Eigen::MatrixXd::Constant(6, 2, 0.4);
  std::mt19937_64 rng(3);
  const std::vector<Eigen::MatrixXd> batch =
      waspmpc::sample_control_batch(nominal, stddev, 5, rng);
  REQUIRE(batch.size() == 5);
  CHECK((batch[0] - nominal).cwiseAbs().maxCoeff() == 0.0);
  CHECK((batch[1] - nominal).cwiseAbs().maxCoeff() > 0.0);

  const std::vector<Eigen::MatrixXd> frozen = waspmpc::sample_control_batch(
      nominal, Eigen::MatrixXd::Zero(6, 2), 4, rng);
  for (const Eigen::MatrixXd& candidate : frozen) {
    CHECK((candidate - nominal).cwiseAbs().maxCoeff() == 0.0);
  }

  CHECK_THROWS_AS(waspmpc::sample_control_batch(nominal, stddev, 0, rng),
                  InvalidArgumentError);
  CHECK_THROWS_AS(waspmpc::sample_control_batch(
                      nominal, Eigen::MatrixXd::Zero(5, 2), 3, rng),
                  InvalidArgumentError);
}

TEST_CASE("paired-sample gradient estimates a quadratic bowl") {
  Eigen::MatrixXd target(3, 2);
  target << 0.8, -0.4,
      0.2, 0.6,
      -0.7, 0.3;
  const auto objective = [&target](const Eigen::MatrixXd& u) {
    return 0.5 * (u - target).squaredNorm();
  };
  const Eigen::MatrixXd at = Eigen::MatrixXd::Zero(3, 2);
  const Eigen::MatrixXd truth = at - target;

  std::mt19937_64 rng(3);
  const Eigen::MatrixXd estimate =
      waspmpc::zeroth_order_gradient(objective, at, 0.05, 1024, rng);

  const double cosine = (estimate.cwiseProduct(truth)).sum() /
                        (estimate.norm() * truth.norm());
  CHECK(cosine >= 0.99);
  CHECK((estimate - truth).norm() / truth.norm() <= 0.1);

  CHECK_THROWS_AS(waspmpc::zeroth_order_gradient(objective, at, 0.0, 8, rng),
                  InvalidArgumentError);
  CHECK_THROWS_AS(waspmpc::zeroth_order_gradient(objective, at, 0.05, 0, rng),
                  InvalidArgumentError);
}

TEST_CASE("the dispatcher routes to the same planners") {
  const TaskSpec task = waspmpc::make_lq_task(default_lq_problem(3, 1, 10));
  const Trajectory warm = zero_warm(task);
  std::mt19937_64 rng(6);

  PlannerConfig config;
  config.kind = PlannerKind::kIlqg;
  DerivativeBackend backend = DerivativeBackend::finite_diff();
  const PlanResult direct =
      ilqg_plan(warm, task.dynamics, task.cost, backend, config);
  const PlanResult routed = waspmpc::plan_once(warm, task.dynamics, task.cost,
                                               &backend, config, rng);
  CHECK(direct.cost == routed.cost);
  CHECK((direct.controls - routed.controls).cwiseAbs().maxCoeff() == 0.0);

  // Derivative planners refuse to run without a backend.
  CHECK_THROWS_AS(
      waspmpc::plan_once(warm, task.dynamics, task.cost, nullptr, config, rng),
      InvalidArgumentError);
  config.kind = PlannerKind::kGradientDescent;
  CHECK_THROWS_AS(
      waspmpc::plan_once(warm, task.dynamics, task.cost, nullptr, config, rng),
      InvalidArgumentError);

  // Sampling planners run backend-free.
  config.kind = PlannerKind::kPredictiveSampling;
  config.sampling.num_samples = 4;
  config.sampling.elite_count = 2;
  const PlanResult sampled = waspmpc::plan_once(warm, task.dynamics, task.cost,
                                                nullptr, config, rng);
  CHECK(sampled.md_dynamics_calls == 0);
}
