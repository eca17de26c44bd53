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

#ifndef WASPMPC_MODEL_DERIVATIVES_HPP_
#define WASPMPC_MODEL_DERIVATIVES_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "waspmpc/trajectory.hpp"
#include "waspmpc/wasp.hpp"

namespace waspmpc {

// Per-timestep linearization of the dynamics along a trajectory:
// A[i] = df/dx and B[i] = df/du at (x_i, u_i) for i = 0..T-1.
struct ModelDerivatives {
  std::vector<Eigen::MatrixXd> A;
  std::vector<Eigen::MatrixXd> B;
  std::int64_t dynamics_calls = 0;
  double wall_time_s = 0.0;
};

struct WaspAxisSettings {
  double frac = 0.5;
  double tol = 0.5;
};

// Produces ModelDerivatives either by plain finite differencing or by
// per-timestep sequential approximation instances (one pair per timestep:
// a state-axis instance and a control-axis instance, sharing one tangent
// basis per axis). The base point f(x_i, u_i) is evaluated once per
// timestep and shared between the two axes, so the finite-difference
// backend performs exactly T * (state_dim + control_dim + 1) evaluations.
class DerivativeBackend {
 public:
  enum class Kind : std::uint8_t { kFiniteDiff, kWasp };

  static DerivativeBackend finite_diff(double fd_epsilon = kDefaultFdEpsilon);
  static DerivativeBackend wasp(int state_dim, int control_dim, int horizon,
                                const WaspAxisSettings& state_axis,
                                const WaspAxisSettings& control_axis,
                                double fd_epsilon = kDefaultFdEpsilon,
                                std::uint64_t tangent_seed = 0,
                                bool identity_tangents = false);

  Kind kind() const { return kind_; }
  bool is_wasp() const { return kind_ == Kind::kWasp; }
  const std::string& label() const { return label_; }
  double fd_epsilon() const { return fd_epsilon_; }

  // Derivatives for every timestep of the trajectory. threads == 0 runs
  // sequentially; otherwise timesteps are distributed over that many
  // workers (instances are per-timestep, so results do not depend on the
  // thread count). dynamics_calls reports exactly the evaluations made
  // through `f` by this call.
  ModelDerivatives compute(const Dynamics& f, const Trajectory& traj,
                           int threads = 0);

  // Receding-horizon bookkeeping after the first control was executed:
  // instance k takes over the state previously tracked at k+1 and the
  // freed last slot starts fresh.
  void shift_horizon();

  // All instances back to the fresh state.
  void reset();

  int horizon() const { return static_cast<int>(state_instances_.size()); }
  const WaspInstance& state_instance(int i) const;
  const WaspInstance& control_instance(int i) const;

 private:
  DerivativeBackend() = default;

  Kind kind_ = Kind::kFiniteDiff;
  std::string label_ = "fd";
  double fd_epsilon_ = kDefaultFdEpsilon;
  int state_dim_ = 0;
  int control_dim_ = 0;
  std::shared_ptr<const TangentMatrix> state_tangents_;
  std::shared_ptr<const TangentMatrix> control_tangents_;
  std::vector<WaspInstance> state_instances_;
  std::vector<WaspInstance> control_instances_;
};

}  // namespace waspmpc

#endif  // WASPMPC_MODEL_DERIVATIVES_HPP_
