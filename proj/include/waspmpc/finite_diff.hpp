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

#ifndef WASPMPC_FINITE_DIFF_HPP_
#define WASPMPC_FINITE_DIFF_HPP_

#include <functional>

#include <Eigen/Core>

namespace waspmpc {

using VectorFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

inline constexpr double kDefaultFdEpsilon = 1e-6;

// Forward-difference directional derivative (f(x + eps*dir) - base) / eps.
// `base` must equal f(x) and `dir` must be unit length; performs exactly
// one evaluation of f.
Eigen::VectorXd fd_jvp(const VectorFn& f, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& base, const Eigen::VectorXd& dir,
                       double eps);

// Forward-difference Jacobian, one column per standard basis direction.
// n+1 evaluations of f; the overload taking a precomputed `base` performs n.
Eigen::MatrixXd fd_jacobian(const VectorFn& f, const Eigen::VectorXd& x,
                            double eps);
Eigen::MatrixXd fd_jacobian(const VectorFn& f, const Eigen::VectorXd& x,
                            double eps, const Eigen::VectorXd& base);

}  // namespace waspmpc

#endif  // WASPMPC_FINITE_DIFF_HPP_
