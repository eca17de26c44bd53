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

#ifndef WASPMPC_WASP_HPP_
#define WASPMPC_WASP_HPP_

#include <cstdint>
#include <memory>

#include <Eigen/Core>

#include "waspmpc/finite_diff.hpp"
#include "waspmpc/tangent.hpp"

namespace waspmpc {

// Accuracy and budget knobs for one Jacobian approximation sequence.
//
// frac in (0, 1] and tol in [0, 1] are the user-facing parameters. The
// derived fields pin the per-call probe budget: p_max is always the input
// dimension, p_min = max(1, ceil(frac * p_max)), and tol doubles as both
// the direction threshold p_theta and the magnitude threshold p_n of the
// early-termination test. frac = 1 with tol = 0 disables early
// termination, which makes the scheme equivalent to plain forward
// differencing.
struct WaspConfig {
  double frac = 0.5;
  double tol = 0.5;
  double fd_epsilon = kDefaultFdEpsilon;
  int p_max = 0;
  int p_min = 0;
  double p_theta = 0.5;
  double p_n = 0.5;

  static WaspConfig resolve(double frac, double tol, double fd_epsilon,
                            int input_dim);
};

// Persistent state for one function input axis, updated across a sequence
// of nearby evaluation points. `jacobian` is the current estimate and
// `approx_jvps` holds its predicted directional derivatives along the
// tangent columns. Single writer: at most one update may be in flight per
// instance, while distinct instances are fully independent.
struct WaspInstance {
  WaspInstance(int output_dim, WaspConfig config,
               std::shared_ptr<const TangentMatrix> tangents);

  Eigen::MatrixXd jacobian;     // output_dim x input_dim
  Eigen::MatrixXd approx_jvps;  // output_dim x input_dim
  int cursor = 0;               // next tangent column to probe
  WaspConfig config;
  std::shared_ptr<const TangentMatrix> tangents;
  std::int64_t call_counter = 0;  // cumulative function evaluations
  bool warmed_up = false;         // becomes true after the first update

  int output_dim() const { return static_cast<int>(jacobian.rows()); }
  int input_dim() const { return static_cast<int>(jacobian.cols()); }

  // Back to the fresh state: zero estimate, zero predictions, cursor 0,
  // and the next update forced to consume the full probe budget.
  void reset();
};

enum class StopReason : std::uint8_t { kToleranceMet, kBudgetExhausted };

// One Jacobian approximation together with its evaluation accounting.
// dynamics_calls = jvps_used plus one when the update evaluated the base
// point itself rather than receiving it precomputed.
struct JacobianEstimate {
  Eigen::MatrixXd matrix;
  int jvps_used = 0;
  int dynamics_calls = 0;
  StopReason stop_reason = StopReason::kBudgetExhausted;
};

// Closed-form constrained least-squares update: among all matrices whose
// directional derivative along tangent column `column_index` equals
// `true_jvp` exactly, returns the one whose remaining directional
// derivatives stay closest to `approx_jvps`. With orthonormal tangents
// this is the rank-one correction
//   D = approx_jvps * tangents^T
//     + (true_jvp - approx_jvps.col(i)) * tangents.col(i)^T.
Eigen::MatrixXd kkt_solve(const Eigen::MatrixXd& approx_jvps,
                          const TangentMatrix& tangents, int column_index,
                          const Eigen::VectorXd& true_jvp);

// Two-part acceptance test between a predicted directional derivative and
// a freshly measured one: direction (1 - cosine of the angle between them
// must be <= p_theta) and magnitude (relative norm gap must be <= p_n,
// guarded at 1e-12). A near-zero measurement passes only when the
// prediction is near zero as well (absolute bound 1e-10).
bool termination_check(const Eigen::VectorXd& predicted,
                       const Eigen::VectorXd& truth, const WaspConfig& config);

// One sequential Jacobian update at evaluation point x.
//
// Probes tangent columns round-robin from the instance cursor. Each probe
// measures a ground-truth directional derivative by forward differencing,
// compares it against the instance's prediction, and folds it into the
// estimate via kkt_solve. The loop stops once at least p_min probes were
// consumed and the prediction for the current probe passed
// termination_check, or unconditionally after p_max probes. A fresh
// instance always consumes the full p_max budget on its first update.
//
// The overload without `base` evaluates f(x) once itself; the other reuses
// a precomputed base value. On any error the instance is left in its
// pre-call state.
JacobianEstimate wasp_jacobian(WaspInstance& instance, const VectorFn& f,
                               const Eigen::VectorXd& x);
JacobianEstimate wasp_jacobian(WaspInstance& instance, const VectorFn& f,
                               const Eigen::VectorXd& x,
                               const Eigen::VectorXd& base);

}  // namespace waspmpc

#endif  // WASPMPC_WASP_HPP_
