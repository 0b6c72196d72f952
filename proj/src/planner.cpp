#include "tvmpc/planner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tvmpc {

namespace {

double hull_lo(double a, double b, double half_width) {
  return std::min(a, b) - half_width;
}

double hull_hi(double a, double b, double half_width) {
  return std::max(a, b) + half_width;
}

int pending_index_of(int active_step, int walk_steps) {
  if (active_step > walk_steps) return -1;
  return std::max(active_step, 1) + 1;
}

// End-of-horizon DCM as an affine function of the move sequence:
//   zeta(k+np) = du_row * dU + bias + zeta_ref_term.
struct TerminalDcm {
  Eigen::RowVectorXd du_row;
  double bias{0};
};

TerminalDcm terminal_dcm_rows(const std::vector<DiscreteModeld>& models,
                              const HorizonDims& dims,
                              const Eigen::Vector3d& x, double u_prev,
                              double zeta_ref) {
  Eigen::Matrix3d P = Eigen::Matrix3d::Identity();
  std::vector<Eigen::Vector3d> g(static_cast<size_t>(dims.nc),
                                 Eigen::Vector3d::Zero());
  for (int i = 1; i <= dims.np; ++i) {
    const auto& m = models[static_cast<size_t>(i - 1)];
    P = (m.A * P).eval();
    for (int j = 0; j < dims.nc; ++j) {
      g[static_cast<size_t>(j)] = m.A * g[static_cast<size_t>(j)];
      if (i - 1 >= j) g[static_cast<size_t>(j)] += m.B;
    }
  }
  Eigen::RowVector3d c_zeta;
  c_zeta << 1.0, 1.0 / models.back().omega, 0.0;

  TerminalDcm out;
  out.du_row.resize(dims.nc);
  for (int j = 0; j < dims.nc; ++j) {
    out.du_row[j] = c_zeta.dot(g[static_cast<size_t>(j)]);
  }
  out.bias = c_zeta.dot(P * x) + c_zeta.dot(g[0]) * u_prev - zeta_ref;
  return out;
}

void add_terminal_dcm(QpProblemd& qp, const TerminalDcm& term, double weight) {
  const int nc = static_cast<int>(term.du_row.size());
  qp.H.topLeftCorner(nc, nc) +=
      2.0 * weight * term.du_row.transpose() * term.du_row;
  qp.g.head(nc) += 2.0 * weight * term.du_row.transpose() * term.bias;
}

}  // namespace

QpProblemd assemble_qp(const TvPredictiond& pred, const HorizonPlan& plan,
                       const AxisStated& x_hat, double u_prev, double rho) {
  const int np = static_cast<int>(pred.Sx.rows());
  const int nc = static_cast<int>(pred.Su.cols());

  const Eigen::VectorXd free_resp =
      pred.Sx * x_hat.vector() + pred.Su1 * u_prev;

  QpProblemd p;
  p.H = 2.0 * (pred.Su.transpose() * pred.Su +
               rho * Eigen::MatrixXd::Identity(nc, nc));
  p.g = 2.0 * pred.Su.transpose() * (free_resp - plan.zmp_ref);

  const int m = 2 * np + 4 * nc;
  p.Aineq.setZero(m, nc);
  p.bineq.resize(m);

  // Output bounds over the horizon.
  p.Aineq.topRows(np) = pred.Su;
  p.bineq.head(np) = plan.zmp_hi - free_resp;
  p.Aineq.middleRows(np, np) = -pred.Su;
  p.bineq.segment(np, np) = free_resp - plan.zmp_lo;

  // Cumulative jerk bounds: u_prev + sum_{i<=j} du_i within [u_min, u_max].
  for (int j = 0; j < nc; ++j) {
    p.Aineq.row(2 * np + j).head(j + 1).setOnes();
    p.bineq[2 * np + j] = plan.u_max - u_prev;
    p.Aineq.row(2 * np + nc + j).head(j + 1).setConstant(-1.0);
    p.bineq[2 * np + nc + j] = u_prev - plan.u_min;
  }

  // Per-move rate bounds.
  for (int j = 0; j < nc; ++j) {
    p.Aineq(2 * np + 2 * nc + j, j) = 1.0;
    p.bineq[2 * np + 2 * nc + j] = plan.du_max;
    p.Aineq(2 * np + 3 * nc + j, j) = -1.0;
    p.bineq[2 * np + 3 * nc + j] = -plan.du_min;
  }
  return p;
}

QpProblemd assemble_qp_soft(const TvPredictiond& pred, const HorizonPlan& plan,
                            const AxisStated& x_hat, double u_prev, double rho,
                            double slack_weight, int hard_window) {
  const QpProblemd hard = assemble_qp(pred, plan, x_hat, u_prev, rho);
  const int np = static_cast<int>(pred.Sx.rows());
  const int nc = static_cast<int>(pred.Su.cols());
  const int m = static_cast<int>(hard.Aineq.rows());

  QpProblemd p;
  p.H = Eigen::MatrixXd::Zero(nc + 1, nc + 1);
  p.H.topLeftCorner(nc, nc) = hard.H;
  p.H(nc, nc) = 2.0 * slack_weight;
  p.g = Eigen::VectorXd::Zero(nc + 1);
  p.g.head(nc) = hard.g;

  p.Aineq.setZero(m + 1, nc + 1);
  p.Aineq.topLeftCorner(m, nc) = hard.Aineq;
  p.bineq.resize(m + 1);
  p.bineq.head(m) = hard.bineq;
  // The slack relaxes the output rows beyond the hard window; input rows
  // stay hard and the slack stays nonnegative.
  const int hw = std::clamp(hard_window, 0, np);
  p.Aineq.col(nc).segment(hw, np - hw).setConstant(-1.0);
  p.Aineq.col(nc).segment(np + hw, np - hw).setConstant(-1.0);
  p.Aineq(m, nc) = -1.0;
  p.bineq[m] = 0.0;
  return p;
}

Controller::Controller(GaitSchedule schedule, ControllerConfig config,
                       NoReferenceRollout)
    : sched_(std::move(schedule)), cfg_(config) {
  require_valid(cfg_.dims);
  const int needed = cfg_.walk_steps + 2;
  if (static_cast<int>(sched_.footsteps.size()) < needed) {
    throw std::runtime_error(
        "Controller: schedule exhausted, need " + std::to_string(needed) +
        " footsteps for " + std::to_string(cfg_.walk_steps) +
        " steps but got " + std::to_string(sched_.footsteps.size()));
  }
  committed_ = sched_.footsteps;
  pending_landing_ = nominal_landing(1);
  build_anchor_table();
}

Controller::Controller(GaitSchedule schedule, ControllerConfig config)
    : Controller(std::move(schedule), std::move(config), NoReferenceRollout{}) {
  if (cfg_.adjust_enabled) {
    build_nominal_dcm_table();
  }
}

Eigen::Vector2d Controller::nominal_landing(int step) const {
  return sched_.footsteps[static_cast<size_t>(step + 1)].position;
}

Eigen::Vector2d Controller::nominal_dcm(int cycle) const {
  if (dcm_nominal_.rows() == 0) return Eigen::Vector2d::Zero();
  const int k = std::clamp(cycle, 0,
                           static_cast<int>(dcm_nominal_.rows()) - 1);
  return dcm_nominal_.row(k).transpose();
}

Controller::PhaseInfo Controller::phase_at(double t) const {
  const double D = cfg_.timing.step_duration();
  const double t_eff = t + 1e-9;
  if (t_eff < D) {
    return {Phase::settle, 0, std::max(t, 0.0)};
  }
  const int j = static_cast<int>(std::floor(t_eff / D));
  if (j > cfg_.walk_steps) {
    return {Phase::stand, cfg_.walk_steps + 1,
            t - (cfg_.walk_steps + 1) * D};
  }
  const double t_in = std::max(t - j * D, 0.0);
  const Phase ph = cfg_.timing.in_single_support(t_in)
                       ? Phase::single_support
                       : Phase::double_support;
  return {ph, j, t_in};
}

Eigen::Vector2d Controller::support_of_step(int step) const {
  const int pending = pending_index_of(phase_at(time()).step, cfg_.walk_steps);
  if (step == pending) return pending_landing_;
  return committed_[static_cast<size_t>(step)].position;
}

Eigen::Vector2d Controller::landing_of_step(int step) const {
  return support_of_step(step + 1);
}

double Controller::surface_of_step(int step) const {
  return sched_.footsteps[static_cast<size_t>(step)].surface_z;
}

RefSample Controller::sample_reference(double t) const {
  const PhaseInfo info = phase_at(t);
  const double half = 0.9 * sched_.foot_length / 2.0;

  RefSample s;
  s.phase = info.phase;
  s.step = info.step;
  s.t_in_step = info.t_in_step;

  if (info.phase == Phase::settle || info.phase == Phase::stand) {
    const int a = (info.phase == Phase::settle) ? 0 : cfg_.walk_steps;
    const Eigen::Vector2d fa = support_of_step(a);
    const Eigen::Vector2d fb = support_of_step(a + 1);
    s.zmp_ref = (fa + fb) / 2.0;
    for (int axis = 0; axis < 2; ++axis) {
      s.lo[axis] = hull_lo(fa[axis], fb[axis], half);
      s.hi[axis] = hull_hi(fa[axis], fb[axis], half);
    }
    s.support_center = fa;
    s.other_center = fb;
    s.two_feet = true;
    s.support_z = surface_of_step(a + 1);
    s.vertical = {s.support_z + cfg_.vertical.z_c0, 0.0, 0.0};
    s.omega = natural_frequency<double>(
        {cfg_.vertical.z_c0, 0.0, cfg_.gravity});
    return s;
  }

  const int j = info.step;
  const Eigen::Vector2d sup = support_of_step(j);
  const Eigen::Vector2d land = landing_of_step(j);
  s.support_z = surface_of_step(j);
  s.vertical =
      vertical_reference(info.t_in_step, cfg_.timing, cfg_.vertical,
                         s.support_z);
  s.omega = natural_frequency<double>(
      {s.vertical.z - s.support_z, s.vertical.acc, cfg_.gravity});
  s.support_center = sup;
  s.other_center = land;

  if (info.phase == Phase::single_support) {
    s.zmp_ref = sup;
    s.lo = sup.array() - half;
    s.hi = sup.array() + half;
    s.two_feet = false;
  } else {
    for (int axis = 0; axis < 2; ++axis) {
      s.zmp_ref[axis] = zmp_reference(info.t_in_step, cfg_.timing, sup[axis],
                                      land[axis] - sup[axis]);
      s.lo[axis] = hull_lo(sup[axis], land[axis], half);
      s.hi[axis] = hull_hi(sup[axis], land[axis], half);
    }
    s.two_feet = true;
  }
  return s;
}

HorizonPlan Controller::build_horizon(double t, int axis) const {
  const int np = cfg_.dims.np;
  HorizonPlan plan;
  plan.zmp_ref.resize(np);
  plan.omega.resize(np);
  plan.zmp_lo.resize(np);
  plan.zmp_hi.resize(np);
  plan.u_min = cfg_.jerk_min;
  plan.u_max = cfg_.jerk_max;
  plan.du_min = cfg_.rate_min;
  plan.du_max = cfg_.rate_max;
  for (int i = 1; i <= np; ++i) {
    const RefSample s = sample_reference(t + i * cfg_.sample_time);
    plan.zmp_ref[i - 1] = s.zmp_ref[axis];
    plan.omega[i - 1] = s.omega;
    plan.zmp_lo[i - 1] = s.lo[axis];
    plan.zmp_hi[i - 1] = s.hi[axis];
  }
  return plan;
}

void Controller::build_anchor_table() {
  // zeta' = w (zeta - p) integrated backward from rest at the final ZMP,
  // with p held at its per-cycle midpoint. This is the DCM trajectory the
  // nominal reference plan implies; the terminal cost steers toward it.
  const double T = cfg_.sample_time;
  const double total = (cfg_.walk_steps + 1) * cfg_.timing.step_duration();
  const int K =
      static_cast<int>(std::ceil(total / T)) + 2 * cfg_.dims.np + 4;
  Eigen::Matrix<double, Eigen::Dynamic, 2> p_ref(K, 2);
  Eigen::VectorXd omega(K);
  for (int k = 0; k < K; ++k) {
    const RefSample s = sample_reference(k * T);  // nominal at construction
    p_ref.row(k) = s.zmp_ref.transpose();
    omega[k] = s.omega;
  }
  dcm_anchor_.resize(K, 2);
  dcm_anchor_.row(K - 1) = p_ref.row(K - 1);
  for (int k = K - 2; k >= 0; --k) {
    const double decay = std::exp(-omega[k] * T);
    for (int axis = 0; axis < 2; ++axis) {
      const double p_mid = 0.5 * (p_ref(k, axis) + p_ref(k + 1, axis));
      dcm_anchor_(k, axis) =
          p_mid + (dcm_anchor_(k + 1, axis) - p_mid) * decay;
    }
  }
}

Eigen::Vector2d Controller::anchor_dcm(int cycle) const {
  const int k =
      std::clamp(cycle, 0, static_cast<int>(dcm_anchor_.rows()) - 1);
  return dcm_anchor_.row(k).transpose();
}

void Controller::build_nominal_dcm_table() {
  // Roll out this controller against an exact model plant with adjustment
  // off; the recorded DCM is the planned trajectory an undisturbed walk
  // follows, including the preview transients of the MPC itself.
  ControllerConfig shadow_cfg = cfg_;
  shadow_cfg.adjust_enabled = false;
  Controller shadow(sched_, shadow_cfg, NoReferenceRollout{});

  const double T = cfg_.sample_time;
  const double total = (cfg_.walk_steps + 1) * cfg_.timing.step_duration();
  const int K = static_cast<int>(std::ceil(total / T)) + cfg_.dims.np + 2;
  dcm_nominal_.resize(K, 2);

  const RefSample start = shadow.reference_now();
  Eigen::Vector3d state[2] = {{start.zmp_ref.x(), 0.0, 0.0},
                              {start.zmp_ref.y(), 0.0, 0.0}};
  for (int k = 0; k < K; ++k) {
    const RefSample s = shadow.reference_now();
    for (int axis = 0; axis < 2; ++axis) {
      dcm_nominal_(k, axis) = state[axis][0] + state[axis][1] / s.omega;
    }
    const ControlOutput out =
        shadow.control_step(AxisStated::from_vector(state[0]),
                            AxisStated::from_vector(state[1]));
    const DiscreteModeld m = discretize(T, s.omega);
    for (int axis = 0; axis < 2; ++axis) {
      state[axis] = m.A * state[axis] + m.B * out.jerk[axis];
    }
    shadow.advance();
  }
}

ControlOutput Controller::control_step(const AxisStated& x_hat_x,
                                       const AxisStated& x_hat_y) {
  const double t = time();
  const PhaseInfo info = phase_at(t);
  const std::array<AxisStated, 2> x_hat{x_hat_x, x_hat_y};

  ControlOutput out;
  out.ref = sample_reference(t);
  for (int axis = 0; axis < 2; ++axis) {
    out.dcm[axis] = dcm_of_state(x_hat[axis], out.ref.omega);
  }

  // DCM step adjustment, single support only; the landing is frozen in DS.
  if (cfg_.adjust_enabled && info.phase == Phase::single_support &&
      info.step >= 1 && info.step <= cfg_.walk_steps) {
    const Eigen::Vector2d sup = support_of_step(info.step);
    const Eigen::Vector2d nom_land = nominal_landing(info.step);
    const Eigen::Vector2d dcm_nom = nominal_dcm(cycle_);
    const double t_rem = cfg_.timing.step_duration() - info.t_in_step;
    for (int axis = 0; axis < 2; ++axis) {
      const double nom_offset = nom_land[axis] - sup[axis];
      // Measured-vs-planned DCM deviation mapped onto the extrapolation, so
      // an on-plan walk keeps its nominal landing.
      const double dcm_eff = sup[axis] +
                             nom_offset * std::exp(-out.ref.omega * t_rem) +
                             (out.dcm[axis] - dcm_nom[axis]);
      double lo = cfg_.policy.reach_min[axis];
      double hi = cfg_.policy.reach_max[axis];
      if (axis == 1 && nom_offset < 0.0) {
        lo = -cfg_.policy.reach_max[1];
        hi = -cfg_.policy.reach_min[1];
      }
      const double offset = adjust_step(
          dcm_eff, sup[axis], info.t_in_step, cfg_.timing, out.ref.omega,
          cfg_.policy.compliance_margin, lo, hi, nom_offset);
      pending_landing_[axis] = sup[axis] + offset;
    }
  }
  out.adjusted_landing = pending_landing_;

  // Shared horizon: same omega series and phase schedule for both axes.
  const int np = cfg_.dims.np;
  std::array<HorizonPlan, 2> plans;
  for (int axis = 0; axis < 2; ++axis) {
    plans[axis] = build_horizon(t, axis);
  }
  std::vector<DiscreteModeld> models;
  models.reserve(static_cast<size_t>(np));
  for (int i = 0; i < np; ++i) {
    models.push_back(discretize(cfg_.sample_time, plans[0].omega[i]));
  }

  const TvPredictiond pred = build_tv<double>(models, cfg_.dims);
  const Eigen::Vector2d zeta_target = anchor_dcm(cycle_ + np);
  for (int axis = 0; axis < 2; ++axis) {
    const TerminalDcm term = terminal_dcm_rows(
        models, cfg_.dims, x_hat[axis].vector(), u_prev_[axis],
        zeta_target[axis]);
    const auto with_anchor = [&](QpProblemd qp) {
      if (cfg_.terminal_dcm_weight > 0.0) {
        add_terminal_dcm(qp, term, cfg_.terminal_dcm_weight);
      }
      return qp;
    };

    QpSolutiond sol = solve_qp(
        with_anchor(assemble_qp(pred, plans[axis], x_hat[axis],
                                u_prev_[axis], cfg_.rho)),
        cfg_.qp_max_iter);
    if (sol.status == QpStatus::infeasible) {
      sol = solve_qp(with_anchor(assemble_qp_soft(
                         pred, plans[axis], x_hat[axis], u_prev_[axis],
                         cfg_.rho, cfg_.slack_weight,
                         cfg_.slack_hard_window)),
                     cfg_.qp_max_iter);
      out.slack_used[axis] = true;
    }
    if (sol.status == QpStatus::infeasible) {
      // Even the near window cannot hold; relax every output row.
      sol = solve_qp(with_anchor(assemble_qp_soft(
                         pred, plans[axis], x_hat[axis], u_prev_[axis],
                         cfg_.rho, cfg_.slack_weight, 0)),
                     cfg_.qp_max_iter);
    }
    out.qp_status[axis] = sol.status;

    double du = sol.z.size() > 0 ? sol.z[0] : 0.0;
    du = std::clamp(du, cfg_.rate_min, cfg_.rate_max);
    const double u =
        std::clamp(u_prev_[axis] + du, cfg_.jerk_min, cfg_.jerk_max);
    out.jerk[axis] = u;
    u_prev_[axis] = u;

    const Eigen::Vector3d next =
        models[0].A * x_hat[axis].vector() + models[0].B * u;
    out.planned_com[axis] = AxisStated::from_vector(next);
  }
  return out;
}

void Controller::advance() {
  const PhaseInfo cur = phase_at(time());
  ++cycle_;
  const PhaseInfo next = phase_at(time());
  if (next.step != cur.step) {
    if (cur.step >= 1 && cur.step <= cfg_.walk_steps) {
      committed_[static_cast<size_t>(cur.step + 1)].position =
          pending_landing_;
    }
    if (next.step >= 1 && next.step <= cfg_.walk_steps) {
      pending_landing_ = nominal_landing(next.step);
    } else if (next.step > cfg_.walk_steps) {
      pending_landing_ =
          committed_[static_cast<size_t>(cfg_.walk_steps + 1)].position;
    }
  }
}

}  // namespace tvmpc
