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

#include "waspmpc/finite_diff.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "waspmpc/errors.hpp"

namespace waspmpc {
namespace {

std::string format_point(const Eigen::VectorXd& x) {
  std::ostringstream out;
  out << "[" << x.transpose() << "]";
  return out.str();
}

}  // namespace

Eigen::VectorXd fd_jvp(const VectorFn& f, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& base, const Eigen::VectorXd& dir,
                       double eps) {
  if (!(eps > 0.0)) {
    throw InvalidArgumentError("finite-difference step must be > 0, got " +
                               std::to_string(eps));
  }
  if (dir.size() != x.size()) {
    throw InvalidArgumentError(
        "direction dimension " + std::to_string(dir.size()) +
        " does not match input dimension " + std::to_string(x.size()));
  }
  if (std::abs(dir.norm() - 1.0) > 1e-9) {
    throw InvalidArgumentError("probe direction must be unit length, norm = " +
                               std::to_string(dir.norm()));
  }
  const Eigen::VectorXd probe = x + eps * dir;
  const Eigen::VectorXd y = f(probe);
  if (y.size() != base.size()) {
    throw InvalidArgumentError(
        "function output dimension " + std::to_string(y.size()) +
        " does not match base dimension " + std::to_string(base.size()));
  }
  if (!y.allFinite()) {
    throw NonFiniteError("non-finite function output at input " +
                         format_point(probe));
  }
  return (y - base) / eps;
}

Eigen::MatrixXd fd_jacobian(const VectorFn& f, const Eigen::VectorXd& x,
                            double eps) {
  const Eigen::VectorXd base = f(x);
  if (!base.allFinite()) {
    throw NonFiniteError("non-finite function output at input " +
                         format_point(x));
  }
  return fd_jacobian(f, x, eps, base);
}

Eigen::MatrixXd fd_jacobian(const VectorFn& f, const Eigen::VectorXd& x,
                            double eps, const Eigen::VectorXd& base) {
  const auto n = x.size();
  Eigen::MatrixXd jac(base.size(), n);
  Eigen::VectorXd dir = Eigen::VectorXd::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    dir(j) = 1.0;
    jac.col(j) = fd_jvp(f, x, base, dir, eps);
    dir(j) = 0.0;
  }
  return jac;
}

}  // namespace waspmpc
