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
#include <limits>
#include <memory>
#include <random>
#include <vector>

#include "doctest.h"
#include "waspmpc/errors.hpp"
#include "waspmpc/finite_diff.hpp"
#include "waspmpc/oracles.hpp"
#include "waspmpc/tangent.hpp"

using waspmpc::InvalidArgumentError;
using waspmpc::JacobianEstimate;
using waspmpc::NonFiniteError;
using waspmpc::StopReason;
using waspmpc::TangentMatrix;
using waspmpc::VectorFn;
using waspmpc::WaspConfig;
using waspmpc::WaspInstance;
using waspmpc::kDefaultFdEpsilon;
using waspmpc::kkt_solve;
using waspmpc::make_identity_tangents;
using waspmpc::make_orthonormal_tangents;
using waspmpc::termination_check;
using waspmpc::wasp_jacobian;

namespace {

std::shared_ptr<const TangentMatrix> shared_tangents(TangentMatrix t) {
  return std::make_shared<const TangentMatrix>(std::move(t));
}

WaspConfig config_for(double frac, double tol, int dim) {
  return WaspConfig::resolve(frac, tol, kDefaultFdEpsilon, dim);
}

// Smooth nonlinear map with dense cross terms; the Jacobian moves with x.
VectorFn bent_map(int out_dim, int in_dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd linear(out_dim, in_dim);
  Eigen::MatrixXd wave(out_dim, in_dim);
  for (int r = 0; r < out_dim; ++r) {
    for (int c = 0; c < in_dim; ++c) {
      linear(r, c) = gauss(rng);
      wave(r, c) = 0.5 * gauss(rng);
    }
  }
  return [linear, wave](const Eigen::VectorXd& x) {
    Eigen::VectorXd y = linear * x;
    for (Eigen::Index r = 0; r < y.size(); ++r) {
      y(r) += (wave.row(r).transpose().cwiseProduct(x.array().sin().matrix()))
                  .sum();
    }
    return y;
  };
}

}  // namespace

TEST_CASE("budget resolution from the probe fraction") {
  const WaspConfig a = config_for(0.3, 0.5, 10);
  CHECK(a.p_min == 3);
  CHECK(a.p_max == 10);
  CHECK(a.p_theta == 0.5);
  CHECK(a.p_n == 0.5);

  CHECK(config_for(0.5, 0.5, 5).p_min == 3);
  CHECK(config_for(1e-9, 0.5, 4).p_min == 1);
  CHECK(config_for(1.0, 0.0, 7).p_min == 7);

  const WaspConfig full = config_for(1.0, 0.0, 7);
  CHECK(full.p_min == full.p_max);
  CHECK(full.p_theta == 0.0);
  CHECK(full.p_n == 0.0);
}

TEST_CASE("invalid budget parameters are rejected") {
  CHECK_THROWS_AS(config_for(0.0, 0.5, 4), InvalidArgumentError);
  CHECK_THROWS_AS(config_for(1.1, 0.5, 4), InvalidArgumentError);
  CHECK_THROWS_AS(config_for(0.5, -0.1, 4), InvalidArgumentError);
  CHECK_THROWS_AS(config_for(0.5, 1.1, 4), InvalidArgumentError);
  CHECK_THROWS_AS(WaspConfig::resolve(0.5, 0.5, 0.0, 4), InvalidArgumentError);
  CHECK_THROWS_AS(WaspConfig::resolve(0.5, 0.5, 1e-6, 0), InvalidArgumentError);
}

TEST_CASE("constrained update from an empty estimate is a rank-one write") {
  const TangentMatrix tangents = make_identity_tangents(3);
  const Eigen::MatrixXd empty = Eigen::MatrixXd::Zero(2, 3);
  Eigen::VectorXd truth(2);
  truth << 1.0, -2.0;

  const Eigen::MatrixXd d = kkt_solve(empty, tangents, 0, truth);
  CHECK((d.col(0) - truth).cwiseAbs().maxCoeff() == 0.0);
  CHECK(d.col(1).cwiseAbs().maxCoeff() == 0.0);
  CHECK(d.col(2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("a measurement matching the prediction leaves the estimate alone") {
  const TangentMatrix tangents = make_orthonormal_tangents(4, 11);
  std::mt19937_64 rng(21);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd approx(3, 4);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) approx(r, c) = gauss(rng);
  }
  const Eigen::VectorXd truth = approx.col(2);
  const Eigen::MatrixXd d = kkt_solve(approx, tangents, 2, truth);
  const Eigen::MatrixXd expected = approx * tangents.columns.transpose();
  CHECK((d - expected).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("constrained update agrees with the dense bordered solve") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 8);
    const int m = 1 + static_cast<int>(rng() % 8);
    const TangentMatrix tangents = make_orthonormal_tangents(n, rng());
    Eigen::MatrixXd approx(m, n);
    Eigen::VectorXd truth(m);
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < n; ++c) approx(r, c) = gauss(rng);
      truth(r) = gauss(rng);
    }
    const int column = static_cast<int>(rng() % static_cast<std::uint64_t>(n));

    const Eigen::MatrixXd fast = kkt_solve(approx, tangents, column, truth);
    const Eigen::MatrixXd dense =
        waspmpc::oracles::kkt_solve_dense(approx, tangents, column, truth);
    worst = std::max(worst, (fast - dense).norm());

    // The constrained direction must reproduce the measurement exactly.
    const double residual =
        (fast * tangents.columns.col(column) - truth).cwiseAbs().maxCoeff();
    CHECK(residual <= 1e-10 * (1.0 + truth.cwiseAbs().maxCoeff()));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("constrained update rejects inconsistent shapes") {
  const TangentMatrix tangents = make_identity_tangents(3);
  const Eigen::MatrixXd approx = Eigen::MatrixXd::Zero(2, 3);
  const Eigen::VectorXd truth = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(kkt_solve(Eigen::MatrixXd::Zero(2, 4), tangents, 0, truth),
                  InvalidArgumentError);
  CHECK_THROWS_AS(kkt_solve(approx, tangents, 3, truth), InvalidArgumentError);
  CHECK_THROWS_AS(kkt_solve(approx, tangents, -1, truth), InvalidArgumentError);
  CHECK_THROWS_AS(kkt_solve(approx, tangents, 0, Eigen::VectorXd::Zero(3)),
                  InvalidArgumentError);
}

TEST_CASE("prediction acceptance semantics") {
  Eigen::VectorXd v(3);
  v << 1.0, 2.0, -1.0;

  // Perfect agreement passes even the zero tolerance.
  CHECK(termination_check(v, v, config_for(0.5, 0.0, 3)));

  // An orthogonal prediction fails the direction test.
  Eigen::Vector3d e0(1.0, 0.0, 0.0);
  Eigen::Vector3d e1(0.0, 1.0, 0.0);
  CHECK_FALSE(termination_check(e0, e1, config_for(0.5, 0.5, 3)));

  // Same direction, modest magnitude error: inside 0.5, outside 0.3.
  CHECK(termination_check(1.4 * v, v, config_for(0.5, 0.5, 3)));
  CHECK_FALSE(termination_check(1.4 * v, v, config_for(0.5, 0.3, 3)));

  // A vanishing measurement accepts only vanishing predictions.
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
  CHECK(termination_check(zero, zero, config_for(0.5, 0.5, 3)));
  CHECK(termination_check(1e-11 * e0, zero, config_for(0.5, 0.5, 3)));
  CHECK_FALSE(termination_check(1e-8 * e0, zero, config_for(0.5, 0.5, 3)));

  CHECK_THROWS_AS(
      termination_check(Eigen::VectorXd::Zero(2), zero, config_for(0.5, 0.5, 3)),
      InvalidArgumentError);
}

TEST_CASE("instance construction rejects bad wiring") {
  const WaspConfig config = config_for(0.5, 0.5, 4);
  CHECK_THROWS_AS(WaspInstance(0, config,
                               shared_tangents(make_identity_tangents(4))),
                  InvalidArgumentError);
  CHECK_THROWS_AS(WaspInstance(3, config, nullptr), InvalidArgumentError);
  CHECK_THROWS_AS(WaspInstance(3, config,
                               shared_tangents(make_identity_tangents(5))),
                  InvalidArgumentError);
}

TEST_CASE("affine maps are recovered on the first sweep and held at p_min") {
  Eigen::MatrixXd m(3, 4);
  m << 0.4, -1.2, 0.9, 2.0,
       1.5, 0.3, -0.8, 0.1,
       -0.6, 2.2, 1.1, -1.7;
  Eigen::VectorXd b(3);
  b << 1.0, -0.5, 0.25;
  const VectorFn f = [m, b](const Eigen::VectorXd& x) {
    return Eigen::VectorXd(m * x + b);
  };

  WaspInstance instance(3, config_for(0.5, 0.25, 4),
                        shared_tangents(make_orthonormal_tangents(4, 5)));
  CHECK(instance.config.p_min == 2);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(4);
  const JacobianEstimate first = wasp_jacobian(instance, f, x);
  CHECK(first.jvps_used == 4);
  CHECK(first.dynamics_calls == 5);
  CHECK((first.matrix - m).cwiseAbs().maxCoeff() <= 1e-8);

  // The model is exact from here on, so every later call stops at the
  // probe floor with the tolerance satisfied.
  for (int call = 0; call < 5; ++call) {
    x = Eigen::VectorXd::Constant(4, 0.3 * (call + 1));
    const JacobianEstimate next = wasp_jacobian(instance, f, x);
    CHECK(next.jvps_used == 2);
    CHECK(next.dynamics_calls == 3);
    CHECK(next.stop_reason == StopReason::kToleranceMet);
    CHECK((next.matrix - m).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("exhaustive budget with axis tangents reduces to differencing") {
  const int n = 5;
  const VectorFn f = bent_map(4, n, 31);
  WaspInstance instance(4, config_for(1.0, 0.0, n),
                        shared_tangents(make_identity_tangents(n)));

  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int call = 0; call < 4; ++call) {
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x(i) = gauss(rng);

    int wasp_calls = 0;
    const VectorFn counted = [&f, &wasp_calls](const Eigen::VectorXd& v) {
      ++wasp_calls;
      return f(v);
    };
    const JacobianEstimate est = wasp_jacobian(instance, counted, x);

    int fd_calls = 0;
    const VectorFn counted_fd = [&f, &fd_calls](const Eigen::VectorXd& v) {
      ++fd_calls;
      return f(v);
    };
    const Eigen::MatrixXd fd = fd_jacobian(counted_fd, x, kDefaultFdEpsilon);

    CHECK((est.matrix - fd).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(est.jvps_used == n);
    CHECK(wasp_calls == fd_calls);
    CHECK(est.dynamics_calls == fd_calls);
  }
}

TEST_CASE("probe counts stay inside the budget and the cursor walks round") {
  const int n = 5;
  const VectorFn f = bent_map(4, n, 77);
  WaspInstance instance(4, config_for(0.4, 0.5, n),
                        shared_tangents(make_orthonormal_tangents(n, 3)));
  CHECK(instance.config.p_min == 2);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  JacobianEstimate warmup = wasp_jacobian(instance, f, x);
  CHECK(warmup.jvps_used == n);
  CHECK(instance.cursor == 0);
  CHECK(instance.warmed_up);

  std::int64_t counted = instance.call_counter;
  int expected_cursor = 0;
  std::mt19937_64 rng(13);
  std::normal_distribution<double> gauss(0.0, 0.2);
  for (int call = 0; call < 8; ++call) {
    for (int i = 0; i < n; ++i) x(i) += gauss(rng);
    const JacobianEstimate est = wasp_jacobian(instance, f, x);
    CHECK(est.jvps_used >= instance.config.p_min);
    CHECK(est.jvps_used <= instance.config.p_max);
    CHECK(est.dynamics_calls == est.jvps_used + 1);
    expected_cursor = (expected_cursor + est.jvps_used) % n;
    CHECK(instance.cursor == expected_cursor);
    counted += est.dynamics_calls;
    CHECK(instance.call_counter == counted);

    // Realignment invariant: the stored predictions are exactly what the
    // current estimate says along every tangent, not only the probed ones.
    const Eigen::MatrixXd replay = est.matrix * instance.tangents->columns;
    CHECK((replay - instance.approx_jvps).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("a mid-sweep failure leaves the instance untouched") {
  const int n = 4;
  const VectorFn clean = bent_map(3, n, 51);
  WaspInstance instance(3, config_for(1.0, 0.0, n),
                        shared_tangents(make_orthonormal_tangents(n, 9)));
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n);
  (void)wasp_jacobian(instance, clean, x0);

  const Eigen::MatrixXd jacobian_before = instance.jacobian;
  const Eigen::MatrixXd approx_before = instance.approx_jvps;
  const int cursor_before = instance.cursor;
  const std::int64_t counter_before = instance.call_counter;

  int calls = 0;
  const VectorFn poisoned = [&clean, &calls](const Eigen::VectorXd& v) {
    ++calls;
    Eigen::VectorXd y = clean(v);
    // Base evaluation plus one probe succeed; the second probe blows up.
    if (calls == 3) y(0) = std::numeric_limits<double>::quiet_NaN();
    return y;
  };
  const Eigen::VectorXd x1 = Eigen::VectorXd::Constant(n, 0.2);
  CHECK_THROWS_AS(wasp_jacobian(instance, poisoned, x1), NonFiniteError);

  CHECK((instance.jacobian - jacobian_before).cwiseAbs().maxCoeff() == 0.0);
  CHECK((instance.approx_jvps - approx_before).cwiseAbs().maxCoeff() == 0.0);
  CHECK(instance.cursor == cursor_before);
  CHECK(instance.call_counter == counter_before);
  CHECK(instance.warmed_up);

  // A non-finite base point fails before any state is touched.
  const VectorFn always_bad = [](const Eigen::VectorXd& v) {
    return Eigen::VectorXd(Eigen::VectorXd::Constant(
        3, std::numeric_limits<double>::quiet_NaN()));
  };
  CHECK_THROWS_AS(wasp_jacobian(instance, always_bad, x1), NonFiniteError);
  CHECK((instance.jacobian - jacobian_before).cwiseAbs().maxCoeff() == 0.0);
  CHECK(instance.call_counter == counter_before);
}

TEST_CASE("reset forgets the web and forces a full sweep") {
  const int n = 4;
  const VectorFn f = bent_map(3, n, 61);
  WaspInstance instance(3, config_for(0.5, 0.5, n),
                        shared_tangents(make_orthonormal_tangents(n, 15)));
  (void)wasp_jacobian(instance, f, Eigen::VectorXd::Zero(n));
  (void)wasp_jacobian(instance, f, Eigen::VectorXd::Constant(n, 0.1));
  CHECK(instance.warmed_up);

  instance.reset();
  CHECK_FALSE(instance.warmed_up);
  CHECK(instance.cursor == 0);
  CHECK(instance.call_counter == 0);
  CHECK(instance.jacobian.cwiseAbs().maxCoeff() == 0.0);
  CHECK(instance.approx_jvps.cwiseAbs().maxCoeff() == 0.0);

  const JacobianEstimate est =
      wasp_jacobian(instance, f, Eigen::VectorXd::Zero(n));
  CHECK(est.jvps_used == n);
}

TEST_CASE("providing the base point skips its evaluation") {
  const int n = 3;
  const VectorFn f = bent_map(2, n, 71);
  WaspInstance instance(2, config_for(1.0, 0.0, n),
                        shared_tangents(make_identity_tangents(n)));
  const Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  const JacobianEstimate est = wasp_jacobian(instance, f, x, f(x));
  CHECK(est.jvps_used == n);
  CHECK(est.dynamics_calls == n);
}

TEST_CASE("estimates sharpen as consecutive inputs cluster") {
  // Single-probe budget on a map whose Jacobian varies smoothly: the
  // stale web entries get more trustworthy as the probe points approach
  // the reference point, so the estimate error should shrink with the
  // step size.
  const int n = 6;
  const WaspConfig config = config_for(1e-9, 1.0, n);
  CHECK(config.p_min == 1);

  std::vector<double> mean_error(5, 0.0);
  const int reps = 20;
  for (int rep = 0; rep < reps; ++rep) {
    std::mt19937_64 rng(100 + rep);
    std::normal_distribution<double> gauss(0.0, 1.0);

    // Stacked quadratic forms with symmetric coefficient matrices; row r
    // of the Jacobian at x is (S_r x)'.
    std::vector<Eigen::MatrixXd> s;
    for (int r = 0; r < n; ++r) {
      Eigen::MatrixXd g(n, n);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) g(i, j) = gauss(rng);
      }
      s.push_back(0.5 * (g + g.transpose()).eval());
    }
    const VectorFn f = [s, n](const Eigen::VectorXd& x) {
      Eigen::VectorXd y(n);
      for (int r = 0; r < n; ++r) y(r) = 0.5 * x.dot(s[r] * x);
      return y;
    };
    const auto true_jacobian = [&s, n](const Eigen::VectorXd& x) {
      Eigen::MatrixXd j(n, n);
      for (int r = 0; r < n; ++r) j.row(r) = (s[r] * x).transpose();
      return j;
    };

    Eigen::VectorXd x0(n);
    for (int i = 0; i < n; ++i) x0(i) = gauss(rng);
    Eigen::VectorXd direction(n);
    for (int i = 0; i < n; ++i) direction(i) = gauss(rng);
    direction.normalize();

    for (int k = 0; k < 5; ++k) {
      WaspInstance instance(n, config,
                            shared_tangents(make_orthonormal_tangents(n, 7)));
      (void)wasp_jacobian(instance, f, x0);
      const double step = std::pow(0.5, k) * 0.8;
      const Eigen::VectorXd probe = x0 + step * direction;
      const JacobianEstimate est = wasp_jacobian(instance, f, probe);
      CHECK(est.jvps_used == 1);
      mean_error[k] += (est.matrix - true_jacobian(probe)).norm() / reps;
    }
  }

  int non_increasing = 0;
  for (int k = 1; k < 5; ++k) {
    if (mean_error[k] <= mean_error[k - 1]) ++non_increasing;
  }
  CHECK(non_increasing >= 4);
  CHECK(mean_error[4] < mean_error[0]);
}
