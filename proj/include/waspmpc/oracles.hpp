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

#ifndef WASPMPC_ORACLES_HPP_
#define WASPMPC_ORACLES_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "waspmpc/cost.hpp"
#include "waspmpc/tangent.hpp"
#include "waspmpc/tasks.hpp"
#include "waspmpc/trajectory.hpp"

namespace waspmpc::oracles {

// Reference for the closed-form constrained update: assembles and solves
// one dense KKT linear system per output row. Deliberately shares no code
// with the production path. Works for any full-rank tangent matrix.
Eigen::MatrixXd kkt_solve_dense(const Eigen::MatrixXd& approx_jvps,
                                const TangentMatrix& tangents, int column_index,
                                const Eigen::VectorXd& true_jvp);

// Finite-horizon discrete-time Riccati recursion for the linear plant,
// including the optimal gains, the optimal control sequence from x0, and
// the optimal trajectory cost 0.5 * x0' P_0 x0.
struct LqrSolution {
  std::vector<Eigen::MatrixXd> P;  // horizon+1 cost-to-go matrices
  std::vector<Eigen::MatrixXd> K;  // horizon feedback gains
  Eigen::MatrixXd optimal_controls;  // horizon x control_dim
  double optimal_cost = 0.0;
};

LqrSolution solve_finite_horizon_lqr(const LqProblem& problem);

// Central finite differences of the total trajectory cost with respect to
// every control entry; each probe re-rolls the whole trajectory.
Eigen::MatrixXd fd_cost_gradient(const Dynamics& f, const CostModel& cost,
                                 const Eigen::VectorXd& x0,
                                 const Eigen::MatrixXd& controls, double dt,
                                 double eps = 1e-6);

// Self-contained verification suite: constrained update vs dense KKT,
// budget-exhausted mode vs plain differencing, backward-pass gradients vs
// differenced costs, and task derivative self-tests.
struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

std::vector<CheckResult> run_verification(std::uint64_t seed = 0);

}  // namespace waspmpc::oracles

#endif  // WASPMPC_ORACLES_HPP_
