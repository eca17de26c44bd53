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

#include <chrono>
#include <cmath>
#include <limits>
#include <utility>

#include <Eigen/Cholesky>

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

// Rollout plus cost with every failure mapped to +inf so line searches and
// candidate comparisons can treat a diverging candidate as arbitrarily bad.
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

struct BackwardPassResult {
  std::vector<Eigen::VectorXd> k;  // feedforward steps
  std::vector<Eigen::MatrixXd> K;  // feedback gains
  bool ok = false;
};

// Riccati-style sweep on the linearized dynamics and the quadratic cost
// expansion. The Levenberg shift mu is added to the control block before
// factorization; a non-positive-definite block reports failure so the
// caller can raise mu and retry.
BackwardPassResult backward_pass(const ModelDerivatives& md,
                                 const CostDerivatives& cd, double mu) {
  const int horizon = static_cast<int>(md.A.size());
  const int control_dim = static_cast<int>(cd.lu.cols());

  BackwardPassResult result;
  result.k.resize(horizon);
  result.K.resize(horizon);

  Eigen::VectorXd vx = cd.terminal_grad;
  Eigen::MatrixXd vxx = cd.terminal_hess;
  const Eigen::MatrixXd shift =
      mu * Eigen::MatrixXd::Identity(control_dim, control_dim);

  for (int i = horizon - 1; i >= 0; --i) {
    const Eigen::MatrixXd& a = md.A[i];
    const Eigen::MatrixXd& b = md.B[i];

    const Eigen::VectorXd qx = cd.lx.row(i).transpose() + a.transpose() * vx;
    const Eigen::VectorXd qu = cd.lu.row(i).transpose() + b.transpose() * vx;
    const Eigen::MatrixXd qxx = cd.lxx[i] + a.transpose() * vxx * a;
    const Eigen::MatrixXd quu = cd.luu[i] + b.transpose() * vxx * b;
    const Eigen::MatrixXd qux = cd.lux[i] + b.transpose() * vxx * a;

    Eigen::LLT<Eigen::MatrixXd> llt(quu + shift);
    if (llt.info() != Eigen::Success) return result;

    result.k[i] = -llt.solve(qu);
    result.K[i] = -llt.solve(qux);

    const Eigen::VectorXd& ki = result.k[i];
    const Eigen::MatrixXd& gi = result.K[i];
    vx = qx + gi.transpose() * quu * ki + gi.transpose() * qu +
         qux.transpose() * ki;
    vxx = qxx + gi.transpose() * quu * gi + gi.transpose() * qux +
          qux.transpose() * gi;
    vxx = 0.5 * (vxx + vxx.transpose()).eval();
  }
  result.ok = true;
  return result;
}

// Closed-loop rollout: each control is the nominal plus the scaled
// feedforward step plus feedback on the state deviation. Returns +inf on
// any non-finite state or cost.
double feedback_rollout(const Dynamics& f, const CostModel& cost,
                        const Trajectory& nominal,
                        const BackwardPassResult& gains, double alpha,
                        Trajectory* out) {
  const int horizon = nominal.horizon;
  Trajectory cand;
  cand.horizon = horizon;
  cand.dt = nominal.dt;
  cand.states.resize(horizon + 1, nominal.states.cols());
  cand.controls.resize(horizon, nominal.controls.cols());
  cand.states.row(0) = nominal.states.row(0);

  Eigen::VectorXd x = nominal.initial_state();
  for (int i = 0; i < horizon; ++i) {
    const Eigen::VectorXd dx = x - nominal.states.row(i).transpose();
    const Eigen::VectorXd u = nominal.controls.row(i).transpose() +
                              alpha * gains.k[i] + gains.K[i] * dx;
    if (!u.allFinite()) return kInf;
    x = f.step(x, u);
    if (!x.allFinite()) return kInf;
    cand.controls.row(i) = u.transpose();
    cand.states.row(i + 1) = x.transpose();
  }

  double c;
  try {
    c = total_cost(cand, cost);
  } catch (const Error&) {
    return kInf;
  }
  if (out != nullptr) *out = std::move(cand);
  return c;
}

}  // namespace

std::string planner_name(PlannerKind kind) {
  switch (kind) {
    case PlannerKind::kGradientDescent: return "gd";
    case PlannerKind::kIlqg: return "ilqg";
    case PlannerKind::kPredictiveSampling: return "predictive";
    case PlannerKind::kRobustSampling: return "robust";
    case PlannerKind::kCrossEntropy: return "cem";
    case PlannerKind::kSampleGradient: return "sample-gradient";
  }
  throw InvalidArgumentError("unknown planner kind");
}

PlannerKind planner_from_name(const std::string& name) {
  if (name == "gd") return PlannerKind::kGradientDescent;
  if (name == "ilqg") return PlannerKind::kIlqg;
  if (name == "predictive") return PlannerKind::kPredictiveSampling;
  if (name == "robust") return PlannerKind::kRobustSampling;
  if (name == "cem") return PlannerKind::kCrossEntropy;
  if (name == "sample-gradient") return PlannerKind::kSampleGradient;
  throw InvalidArgumentError(
      "unknown planner '" + name +
      "' (valid: gd, ilqg, predictive, robust, cem, sample-gradient)");
}

bool planner_needs_backend(PlannerKind kind) {
  return kind == PlannerKind::kGradientDescent || kind == PlannerKind::kIlqg;
}

void PlannerConfig::validate() const {
  if (iterations < 1) throw InvalidArgumentError("iterations must be >= 1");
  if (!(line_search.alpha_init > 0.0)) {
    throw InvalidArgumentError("alpha_init must be positive");
  }
  if (!(line_search.shrink > 0.0) || !(line_search.shrink < 1.0)) {
    throw InvalidArgumentError("line search shrink must be in (0, 1)");
  }
  if (line_search.max_backtracks < 0) {
    throw InvalidArgumentError("max_backtracks must be >= 0");
  }
  if (!(regularization.mu_init > 0.0) ||
      !(regularization.mu_max > regularization.mu_init)) {
    throw InvalidArgumentError("regularization bounds are inconsistent");
  }
  if (!(regularization.mu_up > 1.0) || !(regularization.mu_down < 1.0) ||
      !(regularization.mu_down > 0.0)) {
    throw InvalidArgumentError("regularization factors are inconsistent");
  }
  if (sampling.num_samples < 1) {
    throw InvalidArgumentError("num_samples must be >= 1");
  }
  if (sampling.elite_count < 1 ||
      sampling.elite_count > sampling.num_samples) {
    throw InvalidArgumentError("elite_count must be in [1, num_samples]");
  }
  if (sampling.smoothing < 0.0 || sampling.smoothing > 1.0) {
    throw InvalidArgumentError("smoothing must be in [0, 1]");
  }
  if (!(sampling.noise_scale >= 0.0)) {
    throw InvalidArgumentError("noise_scale must be >= 0");
  }
  if (!(sampling.temperature_scale > 0.0)) {
    throw InvalidArgumentError("temperature_scale must be positive");
  }
  if (!(sampling.gradient_sigma > 0.0)) {
    throw InvalidArgumentError("gradient_sigma must be positive");
  }
  if (threads < 0) throw InvalidArgumentError("threads must be >= 0");
}

Eigen::MatrixXd control_gradient(const ModelDerivatives& md,
                                 const CostDerivatives& cd) {
  const int horizon = static_cast<int>(md.A.size());
  if (static_cast<int>(cd.lx.rows()) != horizon) {
    throw InvalidArgumentError(
        "model and cost derivatives cover different horizons");
  }
  Eigen::MatrixXd grad(horizon, cd.lu.cols());
  Eigen::VectorXd lambda = cd.terminal_grad;
  for (int i = horizon - 1; i >= 0; --i) {
    grad.row(i) =
        (cd.lu.row(i).transpose() + md.B[i].transpose() * lambda).transpose();
    lambda = cd.lx.row(i).transpose() + md.A[i].transpose() * lambda;
  }
  return grad;
}

PlanResult gd_plan(const Trajectory& warm_start, const Dynamics& f,
                   const CostModel& cost, DerivativeBackend& backend,
                   const PlannerConfig& config) {
  config.validate();
  check_warm_start(warm_start, f);
  const auto start = std::chrono::steady_clock::now();
  const std::int64_t calls_before = f.calls();

  PlanResult result;
  // The warm-start states may be stale after a receding-horizon shift, so
  // the nominal is re-rolled before differentiating along it.
  Trajectory traj = rollout(f, warm_start.initial_state(), warm_start.controls,
                            warm_start.dt);
  double current = total_cost(traj, cost);

  for (int iter = 0; iter < config.iterations; ++iter) {
    ModelDerivatives md = backend.compute(f, traj, config.threads);
    result.md_dynamics_calls += md.dynamics_calls;
    result.derivative_time_s += md.wall_time_s;
    const CostDerivatives cd = cost_derivatives(traj, cost);
    const Eigen::MatrixXd grad = control_gradient(md, cd);
    if (grad.norm() == 0.0) break;

    double alpha = config.line_search.alpha_init;
    bool improved = false;
    for (int bt = 0; bt <= config.line_search.max_backtracks; ++bt) {
      Trajectory cand;
      const double cand_cost =
          guarded_cost(f, cost, traj.initial_state(),
                       traj.controls - alpha * grad, traj.dt, &cand);
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
  result.dynamics_calls = f.calls() - calls_before;
  result.planning_time_s = seconds_since(start);
  return result;
}

PlanResult ilqg_plan(const Trajectory& warm_start, const Dynamics& f,
                     const CostModel& cost, DerivativeBackend& backend,
                     const PlannerConfig& config) {
  config.validate();
  check_warm_start(warm_start, f);
  const auto start = std::chrono::steady_clock::now();
  const std::int64_t calls_before = f.calls();
  const RegularizationParams& reg = config.regularization;

  PlanResult result;
  Trajectory traj = rollout(f, warm_start.initial_state(), warm_start.controls,
                            warm_start.dt);
  double current = total_cost(traj, cost);
  double mu = reg.mu_init;

  for (int iter = 0; iter < config.iterations; ++iter) {
    ModelDerivatives md = backend.compute(f, traj, config.threads);
    result.md_dynamics_calls += md.dynamics_calls;
    result.derivative_time_s += md.wall_time_s;
    const CostDerivatives cd = cost_derivatives(traj, cost);

    BackwardPassResult gains = backward_pass(md, cd, mu);
    while (!gains.ok) {
      mu *= reg.mu_up;
      if (mu > reg.mu_max) {
        result.degraded = true;
        break;
      }
      gains = backward_pass(md, cd, mu);
    }
    if (result.degraded) break;

    double alpha = config.line_search.alpha_init;
    bool improved = false;
    for (int bt = 0; bt <= config.line_search.max_backtracks; ++bt) {
      Trajectory cand;
      const double cand_cost =
          feedback_rollout(f, cost, traj, gains, alpha, &cand);
      if (cand_cost < current) {
        traj = std::move(cand);
        current = cand_cost;
        improved = true;
        break;
      }
      alpha *= config.line_search.shrink;
    }

    if (improved) {
      mu = std::max(mu * reg.mu_down, reg.mu_min);
    } else {
      mu *= reg.mu_up;
      if (mu > reg.mu_max) {
        result.degraded = true;
        break;
      }
    }
  }

  result.controls = traj.controls;
  result.trajectory = std::move(traj);
  result.cost = current;
  result.dynamics_calls = f.calls() - calls_before;
  result.planning_time_s = seconds_since(start);
  return result;
}

PlanResult plan_once(const Trajectory& warm_start, const Dynamics& f,
                     const CostModel& cost, DerivativeBackend* backend,
                     const PlannerConfig& config, std::mt19937_64& rng) {
  if (planner_needs_backend(config.kind) && backend == nullptr) {
    throw InvalidArgumentError(planner_name(config.kind) +
                               " requires a derivative backend");
  }
  switch (config.kind) {
    case PlannerKind::kGradientDescent:
      return gd_plan(warm_start, f, cost, *backend, config);
    case PlannerKind::kIlqg:
      return ilqg_plan(warm_start, f, cost, *backend, config);
    case PlannerKind::kPredictiveSampling:
      return predictive_sampling_plan(warm_start, f, cost, config, rng);
    case PlannerKind::kRobustSampling:
      return robust_sampling_plan(warm_start, f, cost, config, rng);
    case PlannerKind::kCrossEntropy:
      return cem_plan(warm_start, f, cost, config, rng);
    case PlannerKind::kSampleGradient:
      return sample_gradient_plan(warm_start, f, cost, config, rng);
  }
  throw InvalidArgumentError("unknown planner kind");
}

}  // namespace waspmpc
