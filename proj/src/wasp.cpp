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

#include "waspmpc/wasp.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "waspmpc/errors.hpp"

namespace waspmpc {
namespace {

// Norm guard for the relative magnitude test.
constexpr double kNormFloor = 1e-12;
// Absolute acceptance bound when the measured derivative is near zero.
constexpr double kZeroTruthBound = 1e-10;

}  // namespace

WaspConfig WaspConfig::resolve(double frac, double tol, double fd_epsilon,
                               int input_dim) {
  if (input_dim < 1) {
    throw InvalidArgumentError("input dimension must be >= 1, got " +
                               std::to_string(input_dim));
  }
  if (!(frac > 0.0) || frac > 1.0) {
    throw InvalidArgumentError("frac must lie in (0, 1], got " +
                               std::to_string(frac));
  }
  if (tol < 0.0 || tol > 1.0) {
    throw InvalidArgumentError("tol must lie in [0, 1], got " +
                               std::to_string(tol));
  }
  if (!(fd_epsilon > 0.0)) {
    throw InvalidArgumentError("finite-difference step must be > 0, got " +
                               std::to_string(fd_epsilon));
  }
  WaspConfig config;
  config.frac = frac;
  config.tol = tol;
  config.fd_epsilon = fd_epsilon;
  config.p_max = input_dim;
  // The small slack keeps exact products like 0.3 * 10 from rounding up.
  config.p_min = static_cast<int>(
      std::ceil(frac * static_cast<double>(input_dim) - 1e-9));
  if (config.p_min < 1) config.p_min = 1;
  if (config.p_min > config.p_max) config.p_min = config.p_max;
  config.p_theta = tol;
  config.p_n = tol;
  return config;
}

WaspInstance::WaspInstance(int output_dim, WaspConfig config_in,
                           std::shared_ptr<const TangentMatrix> tangents_in)
    : config(config_in), tangents(std::move(tangents_in)) {
  if (output_dim < 1) {
    throw InvalidArgumentError("output dimension must be >= 1, got " +
                               std::to_string(output_dim));
  }
  if (!tangents) {
    throw InvalidArgumentError("instance requires a tangent basis");
  }
  if (tangents->dim != config.p_max) {
    throw InvalidArgumentError(
        "tangent dimension " + std::to_string(tangents->dim) +
        " does not match configured input dimension " +
        std::to_string(config.p_max));
  }
  jacobian = Eigen::MatrixXd::Zero(output_dim, config.p_max);
  approx_jvps = Eigen::MatrixXd::Zero(output_dim, config.p_max);
}

void WaspInstance::reset() {
  jacobian.setZero();
  approx_jvps.setZero();
  cursor = 0;
  call_counter = 0;
  warmed_up = false;
}

Eigen::MatrixXd kkt_solve(const Eigen::MatrixXd& approx_jvps,
                          const TangentMatrix& tangents, int column_index,
                          const Eigen::VectorXd& true_jvp) {
  if (approx_jvps.cols() != tangents.dim) {
    throw InvalidArgumentError(
        "stored JVP count " + std::to_string(approx_jvps.cols()) +
        " does not match tangent dimension " + std::to_string(tangents.dim));
  }
  if (column_index < 0 || column_index >= tangents.dim) {
    throw InvalidArgumentError("tangent column " + std::to_string(column_index) +
                               " out of range [0, " +
                               std::to_string(tangents.dim) + ")");
  }
  if (true_jvp.size() != approx_jvps.rows()) {
    throw InvalidArgumentError(
        "measured JVP dimension " + std::to_string(true_jvp.size()) +
        " does not match output dimension " +
        std::to_string(approx_jvps.rows()));
  }
  Eigen::MatrixXd d = approx_jvps * tangents.columns.transpose();
  d.noalias() += (true_jvp - approx_jvps.col(column_index)) *
                 tangents.columns.col(column_index).transpose();
  return d;
}

bool termination_check(const Eigen::VectorXd& predicted,
                       const Eigen::VectorXd& truth, const WaspConfig& config) {
  if (predicted.size() != truth.size()) {
    throw InvalidArgumentError(
        "predicted dimension " + std::to_string(predicted.size()) +
        " does not match measured dimension " + std::to_string(truth.size()));
  }
  const double truth_norm = truth.norm();
  const double predicted_norm = predicted.norm();
  if (truth_norm <= kNormFloor) {
    return predicted_norm <= kZeroTruthBound;
  }
  const double cosine = predicted_norm <= kNormFloor
                            ? 0.0
                            : predicted.dot(truth) / (predicted_norm * truth_norm);
  const bool direction_ok = (1.0 - cosine) <= config.p_theta;
  const bool magnitude_ok = std::abs(predicted_norm - truth_norm) /
                                std::max(truth_norm, kNormFloor) <=
                            config.p_n;
  return direction_ok && magnitude_ok;
}

namespace {

JacobianEstimate wasp_update(WaspInstance& instance, const VectorFn& f,
                             const Eigen::VectorXd& x,
                             const Eigen::VectorXd& base,
                             bool base_evaluated_here) {
  if (x.size() != instance.input_dim()) {
    throw InvalidArgumentError(
        "input dimension " + std::to_string(x.size()) +
        " does not match instance dimension " +
        std::to_string(instance.input_dim()));
  }
  if (base.size() != instance.output_dim()) {
    throw InvalidArgumentError(
        "base dimension " + std::to_string(base.size()) +
        " does not match instance output dimension " +
        std::to_string(instance.output_dim()));
  }
  const TangentMatrix& tangents = *instance.tangents;
  const WaspConfig& config = instance.config;
  const int n = config.p_max;
  // A fresh instance has nothing to predict with; force a full sweep.
  const int min_jvps = instance.warmed_up ? config.p_min : config.p_max;

  // Snapshot for failure atomicity: a half-applied update would poison
  // every later estimate in the sequence.
  const Eigen::MatrixXd jacobian_before = instance.jacobian;
  const Eigen::MatrixXd approx_jvps_before = instance.approx_jvps;
  const int cursor_before = instance.cursor;

  try {
    int jvps = 0;
    StopReason reason = StopReason::kBudgetExhausted;
    while (true) {
      const int i = instance.cursor;
      const Eigen::VectorXd truth =
          fd_jvp(f, x, base, tangents.columns.col(i), config.fd_epsilon);
      ++jvps;
      // Judge the pre-update prediction, then fold the measurement in
      // regardless so the estimate always reproduces it exactly.
      const bool accept =
          jvps >= min_jvps &&
          termination_check(instance.approx_jvps.col(i), truth, config);
      instance.jacobian = kkt_solve(instance.approx_jvps, tangents, i, truth);
      // Realigning the stored predictions with the new estimate
      // (approx_jvps = jacobian * tangents) touches only column i when the
      // tangents are orthonormal: the constraint pins it to the measured
      // value and leaves every other column unchanged.
      instance.approx_jvps.col(i) = truth;
      instance.cursor = (i + 1) % n;
      if (accept) {
        reason = StopReason::kToleranceMet;
        break;
      }
      if (jvps >= config.p_max) {
        reason = StopReason::kBudgetExhausted;
        break;
      }
    }
    instance.warmed_up = true;
    const int calls = jvps + (base_evaluated_here ? 1 : 0);
    instance.call_counter += calls;
    return JacobianEstimate{instance.jacobian, jvps, calls, reason};
  } catch (...) {
    instance.jacobian = jacobian_before;
    instance.approx_jvps = approx_jvps_before;
    instance.cursor = cursor_before;
    throw;
  }
}

}  // namespace

JacobianEstimate wasp_jacobian(WaspInstance& instance, const VectorFn& f,
                               const Eigen::VectorXd& x) {
  const Eigen::VectorXd base = f(x);
  if (!base.allFinite()) {
    throw NonFiniteError("non-finite function output at the base point");
  }
  return wasp_update(instance, f, x, base, /*base_evaluated_here=*/true);
}

JacobianEstimate wasp_jacobian(WaspInstance& instance, const VectorFn& f,
                               const Eigen::VectorXd& x,
                               const Eigen::VectorXd& base) {
  return wasp_update(instance, f, x, base, /*base_evaluated_here=*/false);
}

}  // namespace waspmpc
