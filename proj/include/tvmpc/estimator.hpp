#pragma once

#include <Eigen/Dense>

#include <stdexcept>

#include "tvmpc/model.hpp"

namespace tvmpc {

/// Per-axis Kalman filter state over the discrete triple integrator with a
/// ZMP measurement. Q is the per-cycle process covariance, R the scalar
/// measurement variance.
template <typename Scalar>
struct KfState {
  AxisState<Scalar> x_hat;
  Eigen::Matrix<Scalar, 3, 3> P;
  Eigen::Matrix<Scalar, 3, 3> Q;
  Scalar R{Scalar(1e-4)};

  static KfState with_defaults(const AxisState<Scalar>& x0 = {}) {
    KfState s;
    s.x_hat = x0;
    s.P = Eigen::Matrix<Scalar, 3, 1>(Scalar(1e-4), Scalar(1e-4), Scalar(1e-2))
              .asDiagonal();
    s.Q = Eigen::Matrix<Scalar, 3, 1>(Scalar(1e-8), Scalar(1e-6), Scalar(1e-4))
              .asDiagonal();
    s.R = Scalar(1e-4);
    return s;
  }
};

/// Time update: propagate the estimate through the model under jerk u.
template <typename Scalar>
KfState<Scalar> kf_predict(const KfState<Scalar>& s, Scalar u,
                           const DiscreteModel<Scalar>& model) {
  KfState<Scalar> out = s;
  const Eigen::Matrix<Scalar, 3, 1> x =
      model.A * s.x_hat.vector() + model.B * u;
  out.x_hat = AxisState<Scalar>::from_vector(x);
  out.P = model.A * s.P * model.A.transpose() + s.Q;
  out.P = ((out.P + out.P.transpose()) / Scalar(2)).eval();
  return out;
}

/// Measurement update with a ZMP observation; the output row uses omega_k.
/// Joseph-form covariance update keeps P symmetric positive semidefinite.
template <typename Scalar>
KfState<Scalar> kf_update(const KfState<Scalar>& s, Scalar y_meas,
                          Scalar omega_k) {
  Eigen::Matrix<Scalar, 1, 3> C;
  C << Scalar(1), Scalar(0), Scalar(-1) / (omega_k * omega_k);

  const Scalar innov_cov = C.dot(s.P * C.transpose()) + s.R;
  if (!(innov_cov > Scalar(0))) {
    throw std::runtime_error(
        "kf_update: non-positive innovation covariance");
  }
  const Eigen::Matrix<Scalar, 3, 1> K = s.P * C.transpose() / innov_cov;
  const Scalar innovation = y_meas - C.dot(s.x_hat.vector());

  KfState<Scalar> out = s;
  out.x_hat =
      AxisState<Scalar>::from_vector(s.x_hat.vector() + K * innovation);
  const Eigen::Matrix<Scalar, 3, 3> IKC =
      Eigen::Matrix<Scalar, 3, 3>::Identity() - K * C;
  out.P = IKC * s.P * IKC.transpose() + K * s.R * K.transpose();
  out.P = ((out.P + out.P.transpose()) / Scalar(2)).eval();
  return out;
}

using KfStated = KfState<double>;

}  // namespace tvmpc
