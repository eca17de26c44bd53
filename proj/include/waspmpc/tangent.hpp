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

#ifndef WASPMPC_TANGENT_HPP_
#define WASPMPC_TANGENT_HPP_

#include <cstdint>

#include <Eigen/Core>

namespace waspmpc {

// Fixed orthonormal basis of probe directions. Column i is the direction
// consumed at cursor position i. Treated as immutable once built; a single
// basis is shared read-only by many approximation instances.
struct TangentMatrix {
  int dim = 0;
  Eigen::MatrixXd columns;  // dim x dim, orthonormal
  std::uint64_t seed = 0;
};

// Orthonormalizes a seeded Gaussian matrix via Householder QR with a sign
// convention on diag(R), so the result is a pure function of (dim, seed).
TangentMatrix make_orthonormal_tangents(int dim, std::uint64_t seed);

// Standard basis directions; probing then reduces to coordinate-wise
// finite differencing.
TangentMatrix make_identity_tangents(int dim);

}  // namespace waspmpc

#endif  // WASPMPC_TANGENT_HPP_
