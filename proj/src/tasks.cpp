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

#include "waspmpc/tasks.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <utility>

#include <Eigen/QR>

#include "waspmpc/errors.hpp"
#include "waspmpc/finite_diff.hpp"

namespace waspmpc {
namespace {

constexpr double kGravity = 9.81;

Eigen::MatrixXd seeded_gaussian(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = gauss(rng);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Pendulum: state (angle from the unforced fixed point, angular rate),
// torque input. Angular acceleration (g/l) sin(theta) + u / (m l^2) - c w.

struct PendulumParams {
  double mass = 1.0;
  double length = 1.0;
  double damping = 0.1;
};

Eigen::VectorXd pendulum_step(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                              const PendulumParams& p, double dt) {
  const double theta = x(0);
  const double omega = x(1);
  const double accel = (kGravity / p.length) * std::sin(theta) +
                       u(0) / (p.mass * p.length * p.length) -
                       p.damping * omega;
  Eigen::VectorXd next(2);
  next(0) = theta + dt * omega;
  next(1) = omega + dt * accel;
  return next;
}

void pendulum_jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd&,
                        const PendulumParams& p, double dt, Eigen::MatrixXd& A,
                        Eigen::MatrixXd& B) {
  A.setIdentity(2, 2);
  A(0, 1) = dt;
  A(1, 0) = dt * (kGravity / p.length) * std::cos(x(0));
  A(1, 1) = 1.0 - dt * p.damping;
  B.setZero(2, 1);
  B(1, 0) = dt / (p.mass * p.length * p.length);
}

// ---------------------------------------------------------------------------
// Cartpole: state (cart position, pole angle from the hanging rest pose,
// cart velocity, angular rate), force input. theta = pi is upright.
// An optional one-sided spring acting on the cart enters exactly like an
// extra force, so both variants share the algebra.

struct CartpoleParams {
  double cart_mass = 1.0;
  double pole_mass = 0.3;
  double length = 0.6;
  double wall_stiffness = 0.0;  // > 0 enables the spring wall
  double wall_position = 0.4;
};

struct CartpoleAccel {
  double lin, ang;                      // accelerations
  double dlin_dx, dlin_dth, dlin_dw, dlin_du;
  double dang_dx, dang_dth, dang_dw, dang_du;
};

CartpoleAccel cartpole_accel(double pos, double theta, double omega, double force,
                             const CartpoleParams& p) {
  const double mc = p.cart_mass, mp = p.pole_mass, l = p.length, g = kGravity;
  const double s = std::sin(theta), c = std::cos(theta);
  const double s2 = std::sin(2.0 * theta), c2 = std::cos(2.0 * theta);

  double f = force;
  double df_dx = 0.0;
  if (p.wall_stiffness > 0.0 && pos > p.wall_position) {
    f -= p.wall_stiffness * (pos - p.wall_position);
    df_dx = -p.wall_stiffness;
  }

  const double den = mc + mp * s * s;
  const double dden_dth = mp * s2;

  const double n1 = f + mp * s * (l * omega * omega + g * c);
  const double dn1_dth = mp * (l * omega * omega * c + g * c2);
  const double dn1_dw = 2.0 * mp * l * omega * s;

  const double n2 = -f * c - mp * l * omega * omega * c * s - (mc + mp) * g * s;
  const double dn2_dth =
      f * s - mp * l * omega * omega * c2 - (mc + mp) * g * c;
  const double dn2_dw = -mp * l * omega * s2;

  CartpoleAccel out;
  out.lin = n1 / den;
  out.ang = n2 / (l * den);
  out.dlin_dth = (dn1_dth * den - n1 * dden_dth) / (den * den);
  out.dlin_dw = dn1_dw / den;
  out.dlin_du = 1.0 / den;
  out.dlin_dx = df_dx / den;
  out.dang_dth = (dn2_dth * den - n2 * dden_dth) / (l * den * den);
  out.dang_dw = dn2_dw / (l * den);
  out.dang_du = -c / (l * den);
  out.dang_dx = df_dx * (-c) / (l * den);
  return out;
}

Eigen::VectorXd cartpole_step(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                              const CartpoleParams& p, double dt) {
  const CartpoleAccel a = cartpole_accel(x(0), x(1), x(3), u(0), p);
  Eigen::VectorXd next(4);
  next(0) = x(0) + dt * x(2);
  next(1) = x(1) + dt * x(3);
  next(2) = x(2) + dt * a.lin;
  next(3) = x(3) + dt * a.ang;
  return next;
}

void cartpole_jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                        const CartpoleParams& p, double dt, Eigen::MatrixXd& A,
                        Eigen::MatrixXd& B) {
  const CartpoleAccel a = cartpole_accel(x(0), x(1), x(3), u(0), p);
  A.setIdentity(4, 4);
  A(0, 2) = dt;
  A(1, 3) = dt;
  A(2, 0) = dt * a.dlin_dx;
  A(2, 1) = dt * a.dlin_dth;
  A(2, 3) = dt * a.dlin_dw;
  A(3, 0) = dt * a.dang_dx;
  A(3, 1) = dt * a.dang_dth;
  A(3, 3) = 1.0 + dt * a.dang_dw;
  B.setZero(4, 1);
  B(2, 0) = dt * a.dlin_du;
  B(3, 0) = dt * a.dang_du;
}

// Swing-up cost. Smooth angle penalty 1 + cos(theta) peaks at the rest
// pose and vanishes upright, so no angle wrapping is needed.
CostModel cartpole_cost() {
  const double w_pos = 0.4, w_angle = 3.0, w_v = 0.05, w_w = 0.05, w_u = 2e-3;
  const double tw_pos = 2.0, tw_angle = 30.0, tw_v = 1.0, tw_w = 1.0;
  CostModel cost;
  cost.stage = [=](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    return 0.5 * (w_pos * x(0) * x(0) + w_v * x(2) * x(2) + w_w * x(3) * x(3) +
                  w_u * u(0) * u(0)) +
           w_angle * (1.0 + std::cos(x(1)));
  };
  cost.terminal = [=](const Eigen::VectorXd& x) {
    return 0.5 * (tw_pos * x(0) * x(0) + tw_v * x(2) * x(2) +
                  tw_w * x(3) * x(3)) +
           tw_angle * (1.0 + std::cos(x(1)));
  };
  cost.stage_grad_x = [=](const Eigen::VectorXd& x,
                          const Eigen::VectorXd&) -> Eigen::VectorXd {
    Eigen::VectorXd g(4);
    g << w_pos * x(0), -w_angle * std::sin(x(1)), w_v * x(2), w_w * x(3);
    return g;
  };
  cost.stage_grad_u = [=](const Eigen::VectorXd&,
                          const Eigen::VectorXd& u) -> Eigen::VectorXd {
    return Eigen::VectorXd::Constant(1, w_u * u(0));
  };
  cost.stage_hess_xx = [=](const Eigen::VectorXd& x,
                           const Eigen::VectorXd&) -> Eigen::MatrixXd {
    Eigen::Vector4d d(w_pos, -w_angle * std::cos(x(1)), w_v, w_w);
    return d.asDiagonal();
  };
  cost.stage_hess_uu = [=](const Eigen::VectorXd&,
                           const Eigen::VectorXd&) -> Eigen::MatrixXd {
    return Eigen::MatrixXd::Constant(1, 1, w_u);
  };
  cost.stage_hess_ux = [](const Eigen::VectorXd&,
                          const Eigen::VectorXd&) -> Eigen::MatrixXd {
    return Eigen::MatrixXd::Zero(1, 4);
  };
  cost.terminal_grad = [=](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    Eigen::VectorXd g(4);
    g << tw_pos * x(0), -tw_angle * std::sin(x(1)), tw_v * x(2), tw_w * x(3);
    return g;
  };
  cost.terminal_hess = [=](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
    Eigen::Vector4d d(tw_pos, -tw_angle * std::cos(x(1)), tw_v, tw_w);
    return d.asDiagonal();
  };
  return cost;
}

// ---------------------------------------------------------------------------
// Planar birotor: state (px, pz, roll, vx, vz, roll rate), two thrust
// inputs. Thrust acts along the body z axis, differential thrust rolls.

struct QuadrotorParams {
  double mass = 0.8;
  double arm = 0.15;
  double inertia = 0.01;
};

Eigen::VectorXd quadrotor_step(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                               const QuadrotorParams& p, double dt) {
  const double phi = x(2);
  const double thrust = u(0) + u(1);
  Eigen::VectorXd next(6);
  next(0) = x(0) + dt * x(3);
  next(1) = x(1) + dt * x(4);
  next(2) = x(2) + dt * x(5);
  next(3) = x(3) + dt * (-thrust * std::sin(phi) / p.mass);
  next(4) = x(4) + dt * (thrust * std::cos(phi) / p.mass - kGravity);
  next(5) = x(5) + dt * ((u(1) - u(0)) * p.arm / p.inertia);
  return next;
}

void quadrotor_jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                         const QuadrotorParams& p, double dt,
                         Eigen::MatrixXd& A, Eigen::MatrixXd& B) {
  const double phi = x(2);
  const double thrust = u(0) + u(1);
  A.setIdentity(6, 6);
  A(0, 3) = dt;
  A(1, 4) = dt;
  A(2, 5) = dt;
  A(3, 2) = -dt * thrust * std::cos(phi) / p.mass;
  A(4, 2) = -dt * thrust * std::sin(phi) / p.mass;
  B.setZero(6, 2);
  B(3, 0) = B(3, 1) = -dt * std::sin(phi) / p.mass;
  B(4, 0) = B(4, 1) = dt * std::cos(phi) / p.mass;
  B(5, 0) = -dt * p.arm / p.inertia;
  B(5, 1) = dt * p.arm / p.inertia;
}

// ---------------------------------------------------------------------------
// Torque-driven chain: n joints with sine coupling to both neighbours
// (ends anchored), per-joint viscous damping, a gravity-like restoring
// term, and one torque input per joint. State stacks positions then
// rates. The stiff coupling is integrated with internal Euler substeps,
// which also gives the step function realistic per-call weight; the exact
// Jacobian is the product of the per-substep linearizations.

struct ChainParams {
  int links = 8;
  double stiffness = 4.0;
  double damping = 0.1;
  double gravity = 4.0;
  int substeps = 20;
};

void chain_accel(const Eigen::VectorXd& q, const Eigen::VectorXd& v,
                 const Eigen::VectorXd& u, const ChainParams& p,
                 Eigen::VectorXd& accel) {
  const int n = p.links;
  accel.resize(n);
  for (int j = 0; j < n; ++j) {
    const double left = (j > 0) ? q(j - 1) : 0.0;
    const double right = (j + 1 < n) ? q(j + 1) : 0.0;
    accel(j) = p.stiffness * (std::sin(right - q(j)) - std::sin(q(j) - left)) -
               p.damping * v(j) - p.gravity * std::sin(q(j)) + u(j);
  }
}

Eigen::VectorXd chain_step(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                           const ChainParams& p, double dt) {
  const int n = p.links;
  const double h = dt / p.substeps;
  Eigen::VectorXd q = x.head(n);
  Eigen::VectorXd v = x.tail(n);
  Eigen::VectorXd accel(n);
  for (int s = 0; s < p.substeps; ++s) {
    chain_accel(q, v, u, p, accel);
    q += h * v;
    v += h * accel;
  }
  Eigen::VectorXd next(2 * n);
  next << q, v;
  return next;
}

void chain_jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                     const ChainParams& p, double dt, Eigen::MatrixXd& A,
                     Eigen::MatrixXd& B) {
  const int n = p.links;
  const double h = dt / p.substeps;
  Eigen::VectorXd q = x.head(n);
  Eigen::VectorXd v = x.tail(n);
  Eigen::VectorXd accel(n);
  A.setIdentity(2 * n, 2 * n);
  B.setZero(2 * n, n);
  Eigen::MatrixXd step(2 * n, 2 * n);
  Eigen::MatrixXd step_b(2 * n, n);
  for (int s = 0; s < p.substeps; ++s) {
    // Linearization of one substep around the current internal state.
    step.setZero();
    step_b.setZero();
    for (int j = 0; j < n; ++j) {
      step(j, j) = 1.0;
      step(j, n + j) = h;
      const double left = (j > 0) ? q(j - 1) : 0.0;
      const double right = (j + 1 < n) ? q(j + 1) : 0.0;
      const double c_right = std::cos(right - q(j));
      const double c_left = std::cos(q(j) - left);
      step(n + j, j) = h * (-p.stiffness * (c_right + c_left) -
                            p.gravity * std::cos(q(j)));
      if (j > 0) step(n + j, j - 1) = h * p.stiffness * c_left;
      if (j + 1 < n) step(n + j, j + 1) = h * p.stiffness * c_right;
      step(n + j, n + j) = 1.0 - h * p.damping;
      step_b(n + j, j) = h;
    }
    A = step * A;
    B = step * B + step_b;
    chain_accel(q, v, u, p, accel);
    q += h * v;
    v += h * accel;
  }
}

// ---------------------------------------------------------------------------

TaskSpec finalize(TaskSpec task) {
  if (task.initial_state.size() != task.state_dim) {
    throw InvalidArgumentError("task " + task.name +
                               " has a mismatched initial state");
  }
  task.benchmark = task.state_dim + task.control_dim >= 10;
  return task;
}

}  // namespace

LqProblem default_lq_problem(int state_dim, int control_dim, int horizon,
                             std::uint64_t seed) {
  if (state_dim < 1 || control_dim < 1 || horizon < 1) {
    throw InvalidArgumentError("linear plant dimensions must be >= 1");
  }
  std::mt19937_64 rng(seed);
  // Stable but slowly contracting: a scaled random rotation keeps all
  // modes alive over the horizon without blowing up open loop.
  const Eigen::MatrixXd g = seeded_gaussian(state_dim, state_dim, rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd orth =
      qr.householderQ() * Eigen::MatrixXd::Identity(state_dim, state_dim);
  LqProblem lq;
  lq.A = 0.97 * orth;
  lq.B = 0.4 * seeded_gaussian(state_dim, control_dim, rng);
  lq.Q = Eigen::MatrixXd::Identity(state_dim, state_dim);
  lq.R = 0.2 * Eigen::MatrixXd::Identity(control_dim, control_dim);
  lq.Qf = 5.0 * Eigen::MatrixXd::Identity(state_dim, state_dim);
  lq.x0 = seeded_gaussian(state_dim, 1, rng);
  lq.horizon = horizon;
  return lq;
}

TaskSpec make_lq_task(const LqProblem& problem) {
  TaskSpec task;
  task.name = "lq";
  task.state_dim = static_cast<int>(problem.A.rows());
  task.control_dim = static_cast<int>(problem.B.cols());
  task.dt = problem.dt;
  task.horizon = problem.horizon;
  const Eigen::MatrixXd A = problem.A;
  const Eigen::MatrixXd B = problem.B;
  task.dynamics = Dynamics(
      task.state_dim, task.control_dim,
      [A, B](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
        return Eigen::VectorXd(A * x + B * u);
      });
  task.jacobians = [A, B](const Eigen::VectorXd&, const Eigen::VectorXd&,
                          Eigen::MatrixXd& ja, Eigen::MatrixXd& jb) {
    ja = A;
    jb = B;
  };
  task.cost = make_quadratic_cost(problem.Q, problem.R, problem.Qf,
                                  Eigen::VectorXd::Zero(task.state_dim),
                                  Eigen::VectorXd::Zero(task.control_dim));
  task.initial_state = problem.x0;
  task.probe_scale = 1.0;
  task.noise_scale = 0.5;
  task.success_cost = 10.0;
  return finalize(std::move(task));
}

TaskSpec make_pendulum_task() {
  const PendulumParams p;
  const double dt = 0.01;
  TaskSpec task;
  task.name = "pendulum";
  task.state_dim = 2;
  task.control_dim = 1;
  task.dt = dt;
  task.horizon = 50;
  task.dynamics = Dynamics(2, 1,
                           [p, dt](const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& u) {
                             return pendulum_step(x, u, p, dt);
                           });
  task.jacobians = [p, dt](const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                           Eigen::MatrixXd& A, Eigen::MatrixXd& B) {
    pendulum_jacobians(x, u, p, dt, A, B);
  };
  Eigen::MatrixXd Q(2, 2), R(1, 1), Qf(2, 2);
  Q << 6.0, 0.0, 0.0, 0.4;
  R << 0.2;
  Qf << 60.0, 0.0, 0.0, 4.0;
  task.cost = make_quadratic_cost(Q, R, Qf, Eigen::VectorXd::Zero(2),
                                  Eigen::VectorXd::Zero(1));
  task.initial_state = Eigen::Vector2d(0.4, 0.0);
  task.probe_scale = 0.6;
  task.noise_scale = 0.6;
  task.success_cost = 2.0;
  return finalize(std::move(task));
}

namespace {

TaskSpec make_cartpole_variant(const CartpoleParams& p, const std::string& name) {
  const double dt = 0.01;
  TaskSpec task;
  task.name = name;
  task.state_dim = 4;
  task.control_dim = 1;
  task.dt = dt;
  task.horizon = 50;
  task.dynamics = Dynamics(4, 1,
                           [p, dt](const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& u) {
                             return cartpole_step(x, u, p, dt);
                           });
  task.jacobians = [p, dt](const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                           Eigen::MatrixXd& A, Eigen::MatrixXd& B) {
    cartpole_jacobians(x, u, p, dt, A, B);
  };
  task.cost = cartpole_cost();
  // Exact rest is a stationary point of the swing-up cost (the angle
  // gradient is -w sin(theta)); a small tilt keeps gradients informative.
  task.initial_state = Eigen::Vector4d(0.0, 0.15, 0.0, 0.0);
  task.probe_scale = 0.8;
  task.noise_scale = 2.0;
  task.success_cost = 8.0;
  return finalize(std::move(task));
}

}  // namespace

TaskSpec make_cartpole_task() {
  return make_cartpole_variant(CartpoleParams{}, "cartpole");
}

TaskSpec make_cartpole_wall_task() {
  CartpoleParams p;
  p.wall_stiffness = 60.0;
  p.wall_position = 0.4;
  return make_cartpole_variant(p, "cartpole_wall");
}

TaskSpec make_quadrotor_task() {
  const QuadrotorParams p;
  const double dt = 0.01;
  const double hover = 0.5 * p.mass * kGravity;
  TaskSpec task;
  task.name = "quadrotor";
  task.state_dim = 6;
  task.control_dim = 2;
  task.dt = dt;
  task.horizon = 50;
  task.dynamics = Dynamics(6, 2,
                           [p, dt](const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& u) {
                             return quadrotor_step(x, u, p, dt);
                           });
  task.jacobians = [p, dt](const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                           Eigen::MatrixXd& A, Eigen::MatrixXd& B) {
    quadrotor_jacobians(x, u, p, dt, A, B);
  };
  Eigen::VectorXd x_ref(6);
  x_ref << 1.0, 0.8, 0.0, 0.0, 0.0, 0.0;
  Eigen::VectorXd u_ref = Eigen::VectorXd::Constant(2, hover);
  Eigen::VectorXd qdiag(6);
  qdiag << 2.0, 2.0, 1.0, 0.2, 0.2, 0.1;
  Eigen::VectorXd qfdiag = 10.0 * qdiag;
  task.cost = make_quadratic_cost(
      Eigen::MatrixXd(qdiag.asDiagonal()),
      0.05 * Eigen::MatrixXd::Identity(2, 2),
      Eigen::MatrixXd(qfdiag.asDiagonal()), x_ref, u_ref);
  task.initial_state = Eigen::VectorXd::Zero(6);
  task.probe_scale = 0.5;
  task.noise_scale = 1.0;
  task.success_cost = 6.0;
  return finalize(std::move(task));
}

TaskSpec make_chain_task() {
  const ChainParams p;
  const double dt = 0.01;
  const int n = p.links;
  TaskSpec task;
  task.name = "chain";
  task.state_dim = 2 * n;
  task.control_dim = n;
  task.dt = dt;
  task.horizon = 50;
  task.dynamics = Dynamics(2 * n, n,
                           [p, dt](const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& u) {
                             return chain_step(x, u, p, dt);
                           });
  task.jacobians = [p, dt](const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                           Eigen::MatrixXd& A, Eigen::MatrixXd& B) {
    chain_jacobians(x, u, p, dt, A, B);
  };
  // Drive the chain into an alternating bend and hold it there. Neighbour
  // differences at the target exceed pi/2, where the sine coupling's
  // restoring slope goes negative, so the held pose needs active feedback.
  Eigen::VectorXd x_ref = Eigen::VectorXd::Zero(2 * n);
  for (int j = 0; j < n; ++j) x_ref(j) = (j % 2 == 0) ? 0.9 : -0.9;
  Eigen::VectorXd qdiag(2 * n);
  qdiag.head(n).setConstant(4.0);
  qdiag.tail(n).setConstant(0.2);
  task.cost = make_quadratic_cost(
      Eigen::MatrixXd(qdiag.asDiagonal()),
      0.02 * Eigen::MatrixXd::Identity(n, n),
      Eigen::MatrixXd((4.0 * qdiag).asDiagonal()), x_ref,
      Eigen::VectorXd::Zero(n));
  task.initial_state = Eigen::VectorXd::Zero(2 * n);
  task.probe_scale = 0.6;
  task.noise_scale = 1.5;
  task.success_cost = 30.0;
  return finalize(std::move(task));
}

const std::vector<TaskSpec>& builtin_tasks() {
  static const std::vector<TaskSpec> tasks = [] {
    std::vector<TaskSpec> t;
    t.push_back(make_lq_task(default_lq_problem(8, 4, 50)));
    t.push_back(make_pendulum_task());
    t.push_back(make_cartpole_task());
    t.push_back(make_quadrotor_task());
    t.push_back(make_chain_task());
    t.push_back(make_cartpole_wall_task());
    return t;
  }();
  return tasks;
}

std::vector<std::string> task_names() {
  std::vector<std::string> names;
  for (const auto& t : builtin_tasks()) names.push_back(t.name);
  return names;
}

const TaskSpec& find_task(const std::string& name) {
  for (const auto& t : builtin_tasks()) {
    if (t.name == name) return t;
  }
  std::ostringstream out;
  out << "unknown task '" << name << "'; valid names:";
  for (const auto& t : builtin_tasks()) out << " " << t.name;
  throw InvalidArgumentError(out.str());
}

namespace {

double guarded_error(double a, double b) {
  return std::abs(a - b) / (1.0 + std::abs(a));
}

double max_guarded_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      worst = std::max(worst, guarded_error(a(i, j), b(i, j)));
    }
  }
  return worst;
}

// Central differences, independent of the forward-difference production
// path on purpose.
Eigen::MatrixXd central_diff_jacobian(const VectorFn& f, const Eigen::VectorXd& x,
                                      double eps) {
  Eigen::MatrixXd jac;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Eigen::VectorXd hi = x, lo = x;
    hi(j) += eps;
    lo(j) -= eps;
    const Eigen::VectorXd col = (f(hi) - f(lo)) / (2.0 * eps);
    if (jac.size() == 0) jac.resize(col.size(), x.size());
    jac.col(j) = col;
  }
  return jac;
}

}  // namespace

double max_jacobian_discrepancy(const TaskSpec& task, int num_points,
                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double eps = 1e-6;
  double worst = 0.0;
  Eigen::MatrixXd A, B;
  for (int k = 0; k < num_points; ++k) {
    Eigen::VectorXd x(task.state_dim), u(task.control_dim);
    for (int i = 0; i < task.state_dim; ++i) x(i) = task.probe_scale * gauss(rng);
    for (int i = 0; i < task.control_dim; ++i)
      u(i) = task.probe_scale * gauss(rng);
    task.jacobians(x, u, A, B);
    const Eigen::MatrixXd fd_A = central_diff_jacobian(
        [&](const Eigen::VectorXd& xs) { return task.dynamics.step(xs, u); }, x,
        eps);
    const Eigen::MatrixXd fd_B = central_diff_jacobian(
        [&](const Eigen::VectorXd& us) { return task.dynamics.step(x, us); }, u,
        eps);
    worst = std::max(worst, max_guarded_error(A, fd_A));
    worst = std::max(worst, max_guarded_error(B, fd_B));
  }
  return worst;
}

double max_cost_derivative_discrepancy(const TaskSpec& task, int num_points,
                                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double eps = 1e-5;
  const auto& cost = task.cost;
  double worst = 0.0;
  for (int k = 0; k < num_points; ++k) {
    Eigen::VectorXd x(task.state_dim), u(task.control_dim);
    for (int i = 0; i < task.state_dim; ++i) x(i) = task.probe_scale * gauss(rng);
    for (int i = 0; i < task.control_dim; ++i)
      u(i) = task.probe_scale * gauss(rng);

    const auto stage_of_x = [&](const Eigen::VectorXd& xs) {
      return cost.stage(xs, u);
    };
    const auto stage_of_u = [&](const Eigen::VectorXd& us) {
      return cost.stage(x, us);
    };
    Eigen::VectorXd fd_gx(task.state_dim), fd_gu(task.control_dim);
    for (int i = 0; i < task.state_dim; ++i) {
      Eigen::VectorXd hi = x, lo = x;
      hi(i) += eps;
      lo(i) -= eps;
      fd_gx(i) = (stage_of_x(hi) - stage_of_x(lo)) / (2.0 * eps);
    }
    for (int i = 0; i < task.control_dim; ++i) {
      Eigen::VectorXd hi = u, lo = u;
      hi(i) += eps;
      lo(i) -= eps;
      fd_gu(i) = (stage_of_u(hi) - stage_of_u(lo)) / (2.0 * eps);
    }
    worst = std::max(worst, max_guarded_error(cost.stage_grad_x(x, u), fd_gx));
    worst = std::max(worst, max_guarded_error(cost.stage_grad_u(x, u), fd_gu));

    Eigen::VectorXd fd_tg(task.state_dim);
    for (int i = 0; i < task.state_dim; ++i) {
      Eigen::VectorXd hi = x, lo = x;
      hi(i) += eps;
      lo(i) -= eps;
      fd_tg(i) = (cost.terminal(hi) - cost.terminal(lo)) / (2.0 * eps);
    }
    worst = std::max(worst, max_guarded_error(cost.terminal_grad(x), fd_tg));

    // Hessians: symmetry plus central differences of the gradients.
    const Eigen::MatrixXd hxx = cost.stage_hess_xx(x, u);
    const Eigen::MatrixXd huu = cost.stage_hess_uu(x, u);
    const Eigen::MatrixXd hT = cost.terminal_hess(x);
    worst = std::max(worst, max_guarded_error(hxx, hxx.transpose()));
    worst = std::max(worst, max_guarded_error(huu, huu.transpose()));
    worst = std::max(worst, max_guarded_error(hT, hT.transpose()));
    const Eigen::MatrixXd fd_hxx = central_diff_jacobian(
        [&](const Eigen::VectorXd& xs) -> Eigen::VectorXd {
          return cost.stage_grad_x(xs, u);
        },
        x, eps);
    const Eigen::MatrixXd fd_huu = central_diff_jacobian(
        [&](const Eigen::VectorXd& us) -> Eigen::VectorXd {
          return cost.stage_grad_u(x, us);
        },
        u, eps);
    const Eigen::MatrixXd fd_hux = central_diff_jacobian(
        [&](const Eigen::VectorXd& xs) -> Eigen::VectorXd {
          return cost.stage_grad_u(xs, u);
        },
        x, eps);
    worst = std::max(worst, max_guarded_error(hxx, fd_hxx));
    worst = std::max(worst, max_guarded_error(huu, fd_huu));
    worst =
        std::max(worst, max_guarded_error(cost.stage_hess_ux(x, u), fd_hux));
  }
  return worst;
}

}  // namespace waspmpc
