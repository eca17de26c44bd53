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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "waspmpc/errors.hpp"

namespace waspmpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double seconds_since(std::chrono::steady_clock::time_point start) {
  return static_cast<double>(
             std::chrono::duration_cast<std::chrono::nanoseconds>(
                 std::chrono::steady_clock::now() - start)
                 .count()) *
         1e-9;
}

void check_warm_start(const Trajectory& warm_start, const Dynamics& f) {
  warm_start.validate();
  if (warm_start.states.cols() != f.state_dim() ||
      warm_start.controls.cols() != f.control_dim()) {
    throw InvalidArgumentError("warm start does not match the model dimensions");
  }
}

double guarded_cost(const Dynamics& f, const CostModel& cost,
                    const Eigen::VectorXd& x0, const Eigen::MatrixXd& controls,
                    double dt, Trajectory* out) {
  try {
    Trajectory traj = rollout(f, x0, controls, dt);
    double c = total_cost(traj, cost);
    if (out != nullptr) *out = std::move(traj);
    return c;
  } catch (const Error&) {
    return kInf;
  }
}

// Row-major standard normal fill so the draw order is part of the
// reproducibility contract.
Eigen::MatrixXd standard_normal(Eigen::Index rows, Eigen::Index cols,
                                std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd noise(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) noise(r, c) = gauss(rng);
  }
  return noise;
}

PlanResult finish(PlanResult result, const Dynamics& f,
                  std::int64_t calls_before,
                  std::chrono::steady_clock::time_point start) {
  result.dynamics_calls = f.calls() - calls_before;
  result.planning_time_s = seconds_since(start);
  return result;
}

}  // namespace

std::vector<Eigen::MatrixXd> sample_control_batch(const Eigen::MatrixXd& nominal,
                                                  const Eigen::MatrixXd& stddev,
                                                  int num_samples,
                                                  std::mt19937_64& rng) {
  if (num_samples < 1) throw InvalidArgumentError("num_samples must be >= 1");
  if (stddev.rows() != nominal.rows() || stddev.cols() != nominal.cols()) {
    throw InvalidArgumentError("stddev shape does not match the nominal");
  }
  std::vector<Eigen::MatrixXd> batch;
  batch.reserve(static_cast<std::size_t>(num_samples));
  batch.push_back(nominal);
  for (int k = 1; k < num_samples; ++k) {
    batch.push_back(nominal + stddev.cwiseProduct(standard_normal(
                                  nominal.rows(), nominal.cols(), rng)));
  }
  return batch;
}

Eigen::MatrixXd zeroth_order_gradient(
    const std::function<double(const Eigen::MatrixXd&)>& objective,
    const Eigen::MatrixXd& controls, double sigma, int pairs,
    std::mt19937_64& rng) {
  if (pairs < 1) throw InvalidArgumentError("pairs must be >= 1");
  if (!(sigma > 0.0)) throw InvalidArgumentError("sigma must be positive");
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(controls.rows(), controls.cols());
  for (int p = 0; p < pairs; ++p) {
    const Eigen::MatrixXd xi =
        standard_normal(controls.rows(), controls.cols(), rng);
    const double plus = objective(controls + sigma * xi);
    const double minus = objective(controls - sigma * xi);
    grad += ((plus - minus) / (2.0 * sigma)) * xi;
  }
  grad /= static_cast<double>(pairs);
  return grad;
}

PlanResult predictive_sampling_plan(const Trajectory& warm_start,
                                    const Dynamics& f, const CostModel& cost,
                                    const PlannerConfig& config,
                                    std::mt19937_64& rng) {
  config.validate();
  check_warm_start(warm_start, f);
  const auto start = std::chrono::steady_clock::now();
  const std::int64_t calls_before = f.calls();

  PlanResult result;
  Trajectory traj = rollout(f, warm_start.initial_state(), warm_start.controls,
                            warm_start.dt);
  double current = total_cost(traj, cost);
  const Eigen::MatrixXd stddev = Eigen::MatrixXd::Constant(
      traj.controls.rows(), traj.controls.cols(), config.sampling.noise_scale);

  for (int iter = 0; iter < config.iterations; ++iter) {
    const std::vector<Eigen::MatrixXd> batch = sample_control_batch(
        traj.controls, stddev, config.sampling.num_samples, rng);
    // Candidate 0 is the nominal, whose cost is already known; keeping it
    // in the comparison guarantees the result never regresses below the
    // warm start.
    for (std::size_t k = 1; k < batch.size(); ++k) {
      Trajectory cand;
      const double cand_cost =
          guarded_cost(f, cost, traj.initial_state(), batch[k], traj.dt, &cand);
      if (cand_cost < current) {
        traj = std::move(cand);
        current = cand_cost;
      }
    }
  }

  result.controls = traj.controls;
  result.trajectory = std::move(traj);
  result.cost = current;
  return finish(std::move(result), f, calls_before, start);
}

PlanResult robust_sampling_plan(const Trajectory& warm_start, const Dynamics& f,
                                const CostModel& cost,
                                const PlannerConfig& config,
                                std::mt19937_64& rng) {
  config.validate();
  check_warm_start(warm_start, f);
  const auto start = std::chrono::steady_clock::now();
  const std::int64_t calls_before = f.calls();

  PlanResult result;
  Trajectory traj = rollout(f, warm_start.initial_state(), warm_start.controls,
                            warm_start.dt);
  double current = total_cost(traj, cost);
  const Eigen::MatrixXd stddev = Eigen::MatrixXd::Constant(
      traj.controls.rows(), traj.controls.cols(), config.sampling.noise_scale);

  for (int iter = 0; iter < config.iterations; ++iter) {
    const std::vector<Eigen::MatrixXd> batch = sample_control_batch(
        traj.controls, stddev, config.sampling.num_samples, rng);
    std::vector<double> costs(batch.size(), kInf);
    costs[0] = current;
    for (std::size_t k = 1; k < batch.size(); ++k) {
      costs[k] =
          guarded_cost(f, cost, traj.initial_state(), batch[k], traj.dt, nullptr);
    }

    double best = kInf;
    double worst = -kInf;
    std::size_t best_index = 0;
    for (std::size_t k = 0; k < costs.size(); ++k) {
      if (!std::isfinite(costs[k])) continue;
      if (costs[k] < best) {
        best = costs[k];
        best_index = k;
      }
      worst = std::max(worst, costs[k]);
    }

    // Exponentially tilted average over the finite candidates, with the
    // bandwidth tied to the observed cost spread so the weighting adapts
    // to the problem scale.
    const double bandwidth =
        config.sampling.temperature_scale * (worst - best + 1e-12);
    Eigen::MatrixXd averaged =
        Eigen::MatrixXd::Zero(traj.controls.rows(), traj.controls.cols());
    double weight_sum = 0.0;
    for (std::size_t k = 0; k < costs.size(); ++k) {
      if (!std::isfinite(costs[k])) continue;
      const double w = std::exp(-(costs[k] - best) / bandwidth);
      averaged += w * batch[k];
      weight_sum += w;
    }
    averaged /= weight_sum;

    Trajectory avg_traj;
    const double avg_cost = guarded_cost(f, cost, traj.initial_state(),
                                         averaged, traj.dt, &avg_traj);
    if (avg_cost < current && avg_cost <= best) {
      traj = std::move(avg_traj);
      current = avg_cost;
    } else if (best < current && best_index != 0) {
      // The average did not beat the best candidate; fall back to it.
      Trajectory best_traj;
      const double best_cost =
          guarded_cost(f, cost, traj.initial_state(), batch[best_index],
                       traj.dt, &best_traj);
      if (best_cost < current) {
        traj = std::move(best_traj);
        current = best_cost;
      }
    }
  }

  result.controls = traj.controls;
  result.trajectory = std::move(traj);
  result.cost = current;
  return finish(std::move(result), f, calls_before, start);
}

PlanResult cem_plan(const Trajectory& warm_start, const Dynamics& f,
                    const CostModel& cost, const PlannerConfig& config,
                    std::mt19937_64& rng) {
  config.validate();
  check_warm_start(warm_start, f);
  const auto start = std::chrono::steady_clock::now();
  const std::int64_t calls_before = f.calls();
  const SamplingParams& sp = config.sampling;

  PlanResult result;
  Trajectory best_traj = rollout(f, warm_start.initial_state(),
                                 warm_start.controls, warm_start.dt);
  double best_cost = total_cost(best_traj, cost);

  Eigen::MatrixXd mean = best_traj.controls;
  Eigen::MatrixXd stddev = Eigen::MatrixXd::Constant(
      mean.rows(), mean.cols(), sp.noise_scale);
  const Eigen::VectorXd x0 = best_traj.initial_state();
  const double dt = best_traj.dt;

  for (int iter = 0; iter < config.iterations; ++iter) {
    const std::vector<Eigen::MatrixXd> batch =
        sample_control_batch(mean, stddev, sp.num_samples, rng);
    std::vector<double> costs(batch.size());
    for (std::size_t k = 0; k < batch.size(); ++k) {
      Trajectory cand;
      costs[k] = guarded_cost(f, cost, x0, batch[k], dt, &cand);
      if (costs[k] < best_cost) {
        best_cost = costs[k];
        best_traj = std::move(cand);
      }
    }

    std::vector<std::size_t> order(batch.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&costs](std::size_t a, std::size_t b) {
                       return costs[a] < costs[b];
                     });
    const int elites = std::min<int>(sp.elite_count,
                                     static_cast<int>(order.size()));

    Eigen::MatrixXd elite_mean = Eigen::MatrixXd::Zero(mean.rows(), mean.cols());
    int used = 0;
    for (int e = 0; e < elites; ++e) {
      if (!std::isfinite(costs[order[e]])) break;
      elite_mean += batch[order[e]];
      ++used;
    }
    if (used == 0) continue;  // every candidate diverged; resample as-is
    elite_mean /= static_cast<double>(used);

    Eigen::MatrixXd elite_var = Eigen::MatrixXd::Zero(mean.rows(), mean.cols());
    for (int e = 0; e < used; ++e) {
      const Eigen::MatrixXd d = batch[order[e]] - elite_mean;
      elite_var += d.cwiseProduct(d);
    }
    elite_var /= static_cast<double>(used);

    mean = sp.smoothing * mean + (1.0 - sp.smoothing) * elite_mean;
    stddev = sp.smoothing * stddev +
             (1.0 - sp.smoothing) * elite_var.cwiseSqrt();
  }

  result.controls = best_traj.controls;
  result.cost = best_cost;
  result.trajectory = std::move(best_traj);
  return finish(std::move(result), f, calls_before, start);
}

PlanResult sample_gradient_plan(const Trajectory& warm_start, const Dynamics& f,
                                const CostModel& cost,
                                const PlannerConfig& config,
                                std::mt19937_64& rng) {
  config.validate();
  check_warm_start(warm_start, f);
  const auto start = std::chrono::steady_clock::now();
  const std::int64_t calls_before = f.calls();

  PlanResult result;
  Trajectory traj = rollout(f, warm_start.initial_state(), warm_start.controls,
                            warm_start.dt);
  double current = total_cost(traj, cost);
  const Eigen::VectorXd x0 = traj.initial_state();
  const double dt = traj.dt;

  // Diverging probes contribute a large finite penalty instead of inf so a
  // single bad draw cannot poison the whole estimate with NaNs.
  const auto objective = [&](const Eigen::MatrixXd& controls) {
    const double c = guarded_cost(f, cost, x0, controls, dt, nullptr);
    return std::isfinite(c) ? c : 1e30;
  };
  const int pairs = std::max(1, config.sampling.num_samples / 2);

  for (int iter = 0; iter < config.iterations; ++iter) {
    const Eigen::MatrixXd grad = zeroth_order_gradient(
        objective, traj.controls, config.sampling.gradient_sigma, pairs, rng);
    if (grad.norm() == 0.0) break;

    double alpha = config.line_search.alpha_init;
    bool improved = false;
    for (int bt = 0; bt <= config.line_search.max_backtracks; ++bt) {
      Trajectory cand;
      const double cand_cost =
          guarded_cost(f, cost, x0, traj.controls - alpha * grad, dt, &cand);
      if (cand_cost < current) {
        traj = std::move(cand);
        current = cand_cost;
        improved = true;
        break;
      }
      alpha *= config.line_search.shrink;
    }
    if (!improved) break;
  }

  result.controls = traj.controls;
  result.trajectory = std::move(traj);
  result.cost = current;
  return finish(std::move(result), f, calls_before, start);
}

}  // namespace waspmpc
