#pragma once

#include <Eigen/Dense>

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tvmpc/model.hpp"

namespace tvmpc {

/// Prediction horizon (np output samples) and control horizon (nc free moves).
struct HorizonDims {
  int np{1};
  int nc{1};

  bool valid() const { return nc >= 1 && nc <= np; }
};

inline void require_valid(const HorizonDims& dims) {
  if (!dims.valid()) {
    throw std::invalid_argument("HorizonDims: need 1 <= nc <= np");
  }
}

/// Time-invariant condensed prediction Y = F x(k) + Phi U over np samples,
/// with U the nc absolute jerk inputs; the last input is held for the rest
/// of the horizon, so the final column of Phi accumulates the tail terms.
template <typename Scalar>
struct LtiPrediction {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 3> F;          // np x 3
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> Phi;  // np x nc
};

/// Time-varying condensed prediction
///   Y = Sx x(0) + Su1 u(-1) + Su dU
/// in the incremental-input convention u(k) = u(k-1) + du(k), du(j) = 0 for
/// j >= nc.
template <typename Scalar>
struct TvPrediction {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 3> Sx;          // np x 3
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> Su1;         // np
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> Su;  // np x nc
};

/// Builds the LTI prediction pair for a fixed model. Row i (0-based) predicts
/// y(k+i+1); entry (i, j) of Phi is C A^(i-j) B, with the hold-after-nc rule
/// folded into the last column.
template <typename Scalar>
LtiPrediction<Scalar> build_lti(const DiscreteModel<Scalar>& model,
                                const HorizonDims& dims) {
  require_valid(dims);
  const int np = dims.np;
  const int nc = dims.nc;
  const auto C = model.output_row();

  LtiPrediction<Scalar> out;
  out.F.resize(np, 3);
  out.Phi.setZero(np, nc);

  // Markov parameters h[m] = C A^m B and the F rows in one sweep.
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> h(np);
  Eigen::Matrix<Scalar, 1, 3> row = C;  // C A^m as m grows
  for (int m = 0; m < np; ++m) {
    h[m] = row.dot(model.B);
    row = (row * model.A).eval();
    out.F.row(m) = row;  // C A^(m+1)
  }

  for (int i = 0; i < np; ++i) {
    const int jmax = std::min(i, nc - 1);
    for (int j = 0; j < jmax; ++j) {
      out.Phi(i, j) = h[i - j];
    }
    // Last usable column holds the input for the remaining samples.
    Scalar tail = Scalar(0);
    for (int m = jmax; m <= i; ++m) {
      tail += h[i - m];
    }
    out.Phi(i, jmax) = tail;
  }
  return out;
}

/// Builds the time-varying prediction triple from per-sample models.
/// models[j] carries the transition A(j), B(j) from sample k+j to k+j+1 and
/// the omega of the output row applied at sample k+j+1, so row i of the
/// result predicts y(k+i+1) = C(i+1) x(k+i+1).
template <typename Scalar>
TvPrediction<Scalar> build_tv(std::span<const DiscreteModel<Scalar>> models,
                              const HorizonDims& dims) {
  require_valid(dims);
  if (static_cast<int>(models.size()) != dims.np) {
    throw std::invalid_argument(
        "build_tv: expected " + std::to_string(dims.np) + " models, got " +
        std::to_string(models.size()));
  }
  const int np = dims.np;
  const int nc = dims.nc;

  TvPrediction<Scalar> out;
  out.Sx.resize(np, 3);
  out.Su1.resize(np);
  out.Su.setZero(np, nc);

  using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
  using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

  // P = A(i-1)...A(0); g[j] accumulates the state response to a unit input
  // applied from sample j onward (the coefficient of du(j), and of u(-1)
  // for j = 0).
  Matrix3 P = Matrix3::Identity();
  std::vector<Vector3> g(static_cast<size_t>(nc), Vector3::Zero());

  for (int i = 1; i <= np; ++i) {
    const auto& m = models[static_cast<size_t>(i - 1)];
    P = (m.A * P).eval();
    for (int j = 0; j < nc; ++j) {
      g[static_cast<size_t>(j)] = m.A * g[static_cast<size_t>(j)];
      if (i - 1 >= j) {
        g[static_cast<size_t>(j)] += m.B;
      }
    }
    const auto C = m.output_row();
    out.Sx.row(i - 1) = C * P;
    out.Su1[i - 1] = C.dot(g[0]);
    for (int j = 0; j < nc; ++j) {
      out.Su(i - 1, j) = C.dot(g[static_cast<size_t>(j)]);
    }
  }
  return out;
}

using LtiPredictiond = LtiPrediction<double>;
using TvPredictiond = TvPrediction<double>;

}  // namespace tvmpc
