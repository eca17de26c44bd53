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

#include "waspmpc/model_derivatives.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <utility>

#include "waspmpc/errors.hpp"
#include "waspmpc/finite_diff.hpp"

namespace waspmpc {
namespace {

std::string axis_label(const WaspAxisSettings& s) {
  std::ostringstream out;
  out << s.frac << "-" << s.tol;
  return out.str();
}

}  // namespace

DerivativeBackend DerivativeBackend::finite_diff(double fd_epsilon) {
  if (!(fd_epsilon > 0.0)) {
    throw InvalidArgumentError("finite-difference step must be > 0, got " +
                               std::to_string(fd_epsilon));
  }
  DerivativeBackend backend;
  backend.kind_ = Kind::kFiniteDiff;
  backend.label_ = "fd";
  backend.fd_epsilon_ = fd_epsilon;
  return backend;
}

DerivativeBackend DerivativeBackend::wasp(int state_dim, int control_dim,
                                          int horizon,
                                          const WaspAxisSettings& state_axis,
                                          const WaspAxisSettings& control_axis,
                                          double fd_epsilon,
                                          std::uint64_t tangent_seed,
                                          bool identity_tangents) {
  if (horizon < 1) {
    throw InvalidArgumentError("backend horizon must be >= 1, got " +
                               std::to_string(horizon));
  }
  DerivativeBackend backend;
  backend.kind_ = Kind::kWasp;
  backend.fd_epsilon_ = fd_epsilon;
  backend.state_dim_ = state_dim;
  backend.control_dim_ = control_dim;
  backend.label_ =
      "wasp-x" + axis_label(state_axis) + "-u" + axis_label(control_axis);
  backend.state_tangents_ = std::make_shared<const TangentMatrix>(
      identity_tangents ? make_identity_tangents(state_dim)
                        : make_orthonormal_tangents(state_dim, tangent_seed));
  backend.control_tangents_ = std::make_shared<const TangentMatrix>(
      identity_tangents
          ? make_identity_tangents(control_dim)
          : make_orthonormal_tangents(control_dim, tangent_seed + 1));
  const WaspConfig state_config = WaspConfig::resolve(
      state_axis.frac, state_axis.tol, fd_epsilon, state_dim);
  const WaspConfig control_config = WaspConfig::resolve(
      control_axis.frac, control_axis.tol, fd_epsilon, control_dim);
  backend.state_instances_.reserve(horizon);
  backend.control_instances_.reserve(horizon);
  for (int i = 0; i < horizon; ++i) {
    backend.state_instances_.emplace_back(state_dim, state_config,
                                          backend.state_tangents_);
    backend.control_instances_.emplace_back(state_dim, control_config,
                                            backend.control_tangents_);
  }
  return backend;
}

const WaspInstance& DerivativeBackend::state_instance(int i) const {
  return state_instances_.at(i);
}

const WaspInstance& DerivativeBackend::control_instance(int i) const {
  return control_instances_.at(i);
}

void DerivativeBackend::shift_horizon() {
  if (!is_wasp()) return;
  const auto n = state_instances_.size();
  // Swaps keep every slot structurally intact; the rotated-out front ends
  // up in the freed last slot, which then starts fresh.
  for (std::size_t k = 0; k + 1 < n; ++k) {
    std::swap(state_instances_[k], state_instances_[k + 1]);
    std::swap(control_instances_[k], control_instances_[k + 1]);
  }
  if (n > 0) {
    state_instances_[n - 1].reset();
    control_instances_[n - 1].reset();
  }
}

void DerivativeBackend::reset() {
  for (auto& inst : state_instances_) inst.reset();
  for (auto& inst : control_instances_) inst.reset();
}

ModelDerivatives DerivativeBackend::compute(const Dynamics& f,
                                            const Trajectory& traj,
                                            int threads) {
  traj.validate();
  const int T = traj.horizon;
  if (traj.states.cols() != f.state_dim() ||
      traj.controls.cols() != f.control_dim()) {
    throw InvalidArgumentError(
        "trajectory dimensions do not match the dynamics");
  }
  if (is_wasp()) {
    if (f.state_dim() != state_dim_ || f.control_dim() != control_dim_) {
      throw InvalidArgumentError("dynamics dimensions do not match backend");
    }
    if (T != horizon()) {
      throw InvalidArgumentError(
          "trajectory horizon " + std::to_string(T) +
          " does not match backend horizon " + std::to_string(horizon()));
    }
  }

  ModelDerivatives out;
  out.A.resize(T);
  out.B.resize(T);
  const std::int64_t calls_before = f.calls();
  const auto t0 = std::chrono::steady_clock::now();

  auto eval_timestep = [&](int i) {
    const Eigen::VectorXd x = traj.states.row(i).transpose();
    const Eigen::VectorXd u = traj.controls.row(i).transpose();
    const Eigen::VectorXd base = f.step(x, u);
    if (!base.allFinite()) {
      throw NonFiniteError("non-finite dynamics output at timestep " +
                           std::to_string(i));
    }
    const VectorFn along_state = [&f, &u](const Eigen::VectorXd& xs) {
      return f.step(xs, u);
    };
    const VectorFn along_control = [&f, &x](const Eigen::VectorXd& us) {
      return f.step(x, us);
    };
    try {
      if (is_wasp()) {
        out.A[i] =
            wasp_jacobian(state_instances_[i], along_state, x, base).matrix;
        out.B[i] =
            wasp_jacobian(control_instances_[i], along_control, u, base).matrix;
      } else {
        out.A[i] = fd_jacobian(along_state, x, fd_epsilon_, base);
        out.B[i] = fd_jacobian(along_control, u, fd_epsilon_, base);
      }
    } catch (const NonFiniteError& e) {
      throw NonFiniteError("timestep " + std::to_string(i) + ": " + e.what());
    }
  };

  if (threads <= 0 || T == 1) {
    for (int i = 0; i < T; ++i) eval_timestep(i);
  } else {
    const int workers = std::min(threads, T);
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        while (true) {
          const int i = next.fetch_add(1, std::memory_order_relaxed);
          if (i >= T) return;
          try {
            eval_timestep(i);
          } catch (...) {
            std::scoped_lock lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
            return;
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  out.wall_time_s =
      static_cast<double>(std::chrono::duration_cast<std::chrono::nanoseconds>(
                              std::chrono::steady_clock::now() - t0)
                              .count()) *
      1e-9;
  out.dynamics_calls = f.calls() - calls_before;
  return out;
}

}  // namespace waspmpc
