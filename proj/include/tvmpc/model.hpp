#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace tvmpc {

/// Per-axis COM state (position, velocity, acceleration).
template <typename Scalar>
struct AxisState {
  Scalar pos{0};
  Scalar vel{0};
  Scalar acc{0};

  Eigen::Matrix<Scalar, 3, 1> vector() const {
    return Eigen::Matrix<Scalar, 3, 1>(pos, vel, acc);
  }

  static AxisState from_vector(const Eigen::Matrix<Scalar, 3, 1>& v) {
    return AxisState{v[0], v[1], v[2]};
  }
};

/// Pendulum geometry at one instant. com_height_rel is the COM height above
/// the current support surface, not above the world ground plane.
template <typename Scalar>
struct PendulumParams {
  Scalar com_height_rel{1};
  Scalar com_vert_acc{0};
  Scalar gravity{Scalar(9.81)};
};

/// COM jerk input, the manipulated variable of the planner.
template <typename Scalar>
struct JerkCommand {
  Scalar jerk{0};
};

/// Sampled triple integrator. A and B depend only on the sample time; the
/// output row mapping state to ZMP carries omega.
template <typename Scalar>
struct DiscreteModel {
  Scalar step_T{0};
  Eigen::Matrix<Scalar, 3, 3> A;
  Eigen::Matrix<Scalar, 3, 1> B;
  Scalar omega{0};

  /// ZMP output row [1, 0, -1/omega^2].
  Eigen::Matrix<Scalar, 1, 3> output_row() const {
    Eigen::Matrix<Scalar, 1, 3> c;
    c << Scalar(1), Scalar(0), Scalar(-1) / (omega * omega);
    return c;
  }
};

/// Natural frequency sqrt((g + z_ddot) / h) of the pendulum.
/// Throws std::domain_error when the radicand is not positive.
template <typename Scalar>
Scalar natural_frequency(const PendulumParams<Scalar>& p) {
  if (!(p.com_height_rel > Scalar(0))) {
    throw std::domain_error(
        "natural_frequency: com_height_rel must be positive");
  }
  const Scalar num = p.gravity + p.com_vert_acc;
  if (!(num > Scalar(0))) {
    throw std::domain_error(
        "natural_frequency: gravity + com_vert_acc must be positive");
  }
  return std::sqrt(num / p.com_height_rel);
}

/// Zero-order-hold discretization of the jerk-driven triple integrator.
template <typename Scalar>
DiscreteModel<Scalar> discretize(Scalar step_T, Scalar omega) {
  if (!(step_T > Scalar(0))) {
    throw std::invalid_argument("discretize: step_T must be positive");
  }
  if (!(omega > Scalar(0))) {
    throw std::invalid_argument("discretize: omega must be positive");
  }
  DiscreteModel<Scalar> m;
  m.step_T = step_T;
  m.omega = omega;
  const Scalar T = step_T;
  m.A << Scalar(1), T, T * T / Scalar(2),  //
      Scalar(0), Scalar(1), T,             //
      Scalar(0), Scalar(0), Scalar(1);
  m.B << T * T * T / Scalar(6), T * T / Scalar(2), T;
  return m;
}

/// ZMP implied by a state: p = pos - acc / omega^2.
template <typename Scalar>
Scalar zmp_of_state(const AxisState<Scalar>& s, Scalar omega) {
  return s.pos - s.acc / (omega * omega);
}

/// Divergent component of motion: zeta = pos + vel / omega.
template <typename Scalar>
Scalar dcm_of_state(const AxisState<Scalar>& s, Scalar omega) {
  return s.pos + s.vel / omega;
}

using AxisStated = AxisState<double>;
using PendulumParamsd = PendulumParams<double>;
using DiscreteModeld = DiscreteModel<double>;

}  // namespace tvmpc
