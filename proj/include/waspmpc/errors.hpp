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

#ifndef WASPMPC_ERRORS_HPP_
#define WASPMPC_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace waspmpc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad argument or shape mismatch, detected before any computation runs.
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

// A dynamics or cost callback produced NaN or Inf.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

// A rollout produced a non-finite state. Carries the failing timestep.
class RolloutDivergedError : public Error {
 public:
  RolloutDivergedError(const std::string& what, int failing_index)
      : Error(what), failing_index_(failing_index) {}
  int failing_index() const noexcept { return failing_index_; }

 private:
  int failing_index_;
};

// Two benchmark runs that cannot legally be compared.
class ConfigMismatchError : public Error {
 public:
  using Error::Error;
};

}  // namespace waspmpc

#endif  // WASPMPC_ERRORS_HPP_
