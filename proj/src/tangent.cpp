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

#include "waspmpc/tangent.hpp"

#include <random>
#include <string>
#include <utility>

#include <Eigen/QR>

#include "waspmpc/errors.hpp"

namespace waspmpc {

TangentMatrix make_orthonormal_tangents(int dim, std::uint64_t seed) {
  if (dim < 1) {
    throw InvalidArgumentError("tangent dimension must be >= 1, got " +
                               std::to_string(dim));
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd g(dim, dim);
  for (int j = 0; j < dim; ++j) {
    for (int i = 0; i < dim; ++i) {
      g(i, j) = gauss(rng);
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(dim, dim);
  // Pin column signs to diag(R) > 0 so the factorization is unique.
  const Eigen::MatrixXd r =
      qr.matrixQR().triangularView<Eigen::Upper>().toDenseMatrix();
  for (int j = 0; j < dim; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return TangentMatrix{dim, std::move(q), seed};
}

TangentMatrix make_identity_tangents(int dim) {
  if (dim < 1) {
    throw InvalidArgumentError("tangent dimension must be >= 1, got " +
                               std::to_string(dim));
  }
  return TangentMatrix{dim, Eigen::MatrixXd::Identity(dim, dim), 0};
}

}  // namespace waspmpc
