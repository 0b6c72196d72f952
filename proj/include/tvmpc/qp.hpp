#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace tvmpc {

/// Dense strictly convex QP
///   min 0.5 z'Hz + g'z   s.t.  Aineq z <= bineq.
template <typename Scalar>
struct QpProblem {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> H;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> g;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> Aineq;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> bineq;
};

enum class QpStatus { optimal, infeasible, max_iter };

template <typename Scalar>
struct QpSolution {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> z;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> lambda;  // one per constraint row
  std::vector<int> active_set;
  Scalar kkt_residual{0};
  QpStatus status{QpStatus::optimal};
  int iterations{0};
};

/// Max of stationarity, primal/dual feasibility and complementarity errors.
/// Stationarity and complementarity are scaled by the size of the quantities
/// involved so the measure stays meaningful for badly scaled problems.
template <typename Scalar>
Scalar kkt_residual(const QpProblem<Scalar>& p,
                    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& z,
                    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& lambda) {
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> grad = p.H * z + p.g;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> stat = grad;
  if (p.Aineq.rows() > 0) stat += p.Aineq.transpose() * lambda;
  const Scalar stat_scale =
      Scalar(1) + grad.template lpNorm<Eigen::Infinity>();
  Scalar res = stat.template lpNorm<Eigen::Infinity>() / stat_scale;
  for (int i = 0; i < p.Aineq.rows(); ++i) {
    const Scalar viol = p.Aineq.row(i).dot(z) - p.bineq[i];
    res = std::max(res, viol);        // primal feasibility
    res = std::max(res, -lambda[i]);  // dual feasibility
    res = std::max(res, std::abs(lambda[i] * viol) /
                            (Scalar(1) + std::abs(lambda[i])));
  }
  return res;
}

/// Dual active-set solver. Starts from the unconstrained minimum and adds
/// the most violated constraint until feasible, taking partial dual steps
/// and dropping blocking constraints as needed. The working set stays
/// linearly independent, so the bordered KKT systems remain nonsingular.
/// Infeasibility shows up as an unbounded dual step and is reported, never
/// thrown. Constraint rows are normalized internally so selection and the
/// termination test are scale-free.
template <typename Scalar>
QpSolution<Scalar> solve_qp(const QpProblem<Scalar>& p, int max_iter = 200) {
  using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Scalar inf = std::numeric_limits<Scalar>::infinity();
  const Scalar feas_tol = Scalar(1e-11);
  const Scalar step_tol = Scalar(1e-13);

  const int n = static_cast<int>(p.H.rows());
  const int m = static_cast<int>(p.Aineq.rows());

  QpSolution<Scalar> sol;
  Eigen::LLT<MatrixX> hllt(p.H);
  if (hllt.info() != Eigen::Success) {
    throw std::invalid_argument("solve_qp: H is not positive definite");
  }
  sol.z = hllt.solve(-p.g);
  sol.lambda = VectorX::Zero(m);

  // Unit-norm copies of the rows; zero rows are constant constraints.
  MatrixX An(m, n);
  VectorX bn(m);
  VectorX row_scale(m);
  for (int i = 0; i < m; ++i) {
    const Scalar nrm = p.Aineq.row(i).norm();
    if (nrm > Scalar(0)) {
      An.row(i) = p.Aineq.row(i) / nrm;
      bn[i] = p.bineq[i] / nrm;
      row_scale[i] = nrm;
    } else {
      An.row(i).setZero();
      bn[i] = p.bineq[i];
      row_scale[i] = Scalar(1);
      if (p.bineq[i] < -feas_tol) {
        sol.status = QpStatus::infeasible;
        sol.kkt_residual = kkt_residual(p, sol.z, sol.lambda);
        return sol;
      }
    }
  }

  std::vector<int> W;       // working set, rows of An
  VectorX lamW(0);          // multipliers for W in normalized scale
  int iter = 0;

  auto finalize = [&](QpStatus status) {
    sol.iterations = iter;
    sol.lambda.setZero();
    for (size_t k = 0; k < W.size(); ++k) {
      sol.lambda[W[k]] = lamW[static_cast<Eigen::Index>(k)] / row_scale[W[k]];
    }
    sol.active_set = W;
    std::sort(sol.active_set.begin(), sol.active_set.end());
    sol.status = status;
    sol.kkt_residual = kkt_residual(p, sol.z, sol.lambda);
    if (status == QpStatus::optimal && !(sol.kkt_residual <= Scalar(1e-8))) {
      sol.status = QpStatus::max_iter;
    }
    return sol;
  };

  while (true) {
    // Most violated constraint outside the working set.
    int pick = -1;
    Scalar worst = feas_tol;
    for (int i = 0; i < m; ++i) {
      if (std::find(W.begin(), W.end(), i) != W.end()) continue;
      const Scalar v = An.row(i).dot(sol.z) - bn[i];
      if (v > worst) {
        worst = v;
        pick = i;
      }
    }
    if (pick < 0) {
      return finalize(QpStatus::optimal);
    }

    const VectorX a_p = An.row(pick).transpose();
    Scalar lam_add = Scalar(0);  // multiplier accumulated for `pick`

    while (true) {
      if (++iter > max_iter) {
        return finalize(QpStatus::max_iter);
      }

      // Step directions from the bordered KKT system
      //   [H Aw'; Aw 0] [s; w] = [-a_p; 0].
      const int nw = static_cast<int>(W.size());
      VectorX s(n), w(nw);
      if (nw == 0) {
        s = hllt.solve(-a_p);
      } else {
        MatrixX K = MatrixX::Zero(n + nw, n + nw);
        K.topLeftCorner(n, n) = p.H;
        for (int k = 0; k < nw; ++k) {
          K.block(n + k, 0, 1, n) = An.row(W[static_cast<size_t>(k)]);
          K.block(0, n + k, n, 1) =
              An.row(W[static_cast<size_t>(k)]).transpose();
        }
        VectorX rhs = VectorX::Zero(n + nw);
        rhs.head(n) = -a_p;
        const VectorX sw = K.fullPivLu().solve(rhs);
        s = sw.head(n);
        w = sw.tail(nw);
      }

      const Scalar descent = a_p.dot(s);
      const Scalar viol = a_p.dot(sol.z) - bn[pick];

      Scalar t_full = inf;
      if (descent < -step_tol) {
        t_full = std::max(Scalar(0), -viol / descent);
      }
      Scalar t_dual = inf;
      int block = -1;
      for (int k = 0; k < nw; ++k) {
        if (w[k] < -step_tol) {
          const Scalar t = -lamW[k] / w[k];
          if (t < t_dual) {
            t_dual = t;
            block = k;
          }
        }
      }

      const Scalar t = std::min(t_full, t_dual);
      if (t == inf) {
        return finalize(QpStatus::infeasible);
      }

      sol.z += t * s;
      lamW += t * w;
      lam_add += t;

      if (t_full <= t_dual) {
        // Constraint pick becomes active.
        W.push_back(pick);
        lamW.conservativeResize(nw + 1);
        lamW[nw] = lam_add;
        break;
      }
      // Drop the blocking constraint and retry.
      W.erase(W.begin() + block);
      VectorX reduced(nw - 1);
      int idx = 0;
      for (int k = 0; k < nw; ++k) {
        if (k != block) reduced[idx++] = lamW[k];
      }
      lamW = reduced;
    }
  }
}

using QpProblemd = QpProblem<double>;
using QpSolutiond = QpSolution<double>;

}  // namespace tvmpc
