#pragma once

#include <Eigen/Dense>

#include <array>
#include <vector>

#include "tvmpc/estimator.hpp"
#include "tvmpc/gait.hpp"
#include "tvmpc/model.hpp"
#include "tvmpc/prediction.hpp"
#include "tvmpc/qp.hpp"

namespace tvmpc {

/// Per-axis references and bounds over the prediction horizon, plus the
/// jerk and jerk-rate limits applied each cycle.
struct HorizonPlan {
  Eigen::VectorXd zmp_ref;
  Eigen::VectorXd omega;
  Eigen::VectorXd zmp_lo;
  Eigen::VectorXd zmp_hi;
  double u_min{-1.5};
  double u_max{1.5};
  double du_min{-0.1};
  double du_max{0.1};
};

enum class Phase { settle, single_support, double_support, stand };

/// Reference sample at one instant: what the ZMP planner, vertical planner
/// and constraints generator jointly emit.
struct RefSample {
  Phase phase{Phase::settle};
  int step{0};                      // walking step index, 0 during settle
  double t_in_step{0};
  Eigen::Vector2d zmp_ref{0, 0};
  Eigen::Vector2d lo{0, 0};
  Eigen::Vector2d hi{0, 0};
  Eigen::Vector2d support_center{0, 0};
  Eigen::Vector2d other_center{0, 0};  // second foot when two are grounded
  bool two_feet{true};
  double support_z{0};
  VerticalSample vertical;
  double omega{0};
};

struct ControllerConfig {
  GaitTiming timing;
  VerticalParams vertical;
  StepAdjustPolicy policy;
  HorizonDims dims{50, 2};
  double sample_time{0.02};
  double gravity{9.81};
  double rho{1e-6};
  double jerk_min{-1.5};
  double jerk_max{1.5};
  double rate_min{-0.1};
  double rate_max{0.1};
  double slack_weight{1e6};
  int slack_hard_window{15};  // near samples kept hard on the soft retry
  // Weight anchoring the end-of-horizon DCM to the reference; with the few
  // free moves of Table-style control horizons the pure output-tracking
  // cost leaves the divergent COM mode unpenalized and the loop unstable.
  double terminal_dcm_weight{100.0};
  int qp_max_iter{200};
  int walk_steps{5};
  bool adjust_enabled{true};
};

struct ControlOutput {
  Eigen::Vector2d jerk{0, 0};
  std::array<AxisStated, 2> planned_com{};
  std::array<QpStatus, 2> qp_status{QpStatus::optimal, QpStatus::optimal};
  std::array<bool, 2> slack_used{false, false};
  Eigen::Vector2d adjusted_landing{0, 0};
  Eigen::Vector2d dcm{0, 0};
  RefSample ref;
};

/// Tracking QP for one axis: H = 2 (Su'Su + rho I), g = 2 Su'(free - ref),
/// with ZMP bounds over the horizon, cumulative jerk bounds and per-move
/// rate bounds as inequality rows.
QpProblemd assemble_qp(const TvPredictiond& pred, const HorizonPlan& plan,
                       const AxisStated& x_hat, double u_prev, double rho);

/// Same problem with one nonnegative slack on the ZMP rows, penalized
/// quadratically; the slack is the last decision variable. Rows in the first
/// hard_window samples stay hard, so the near-term plan keeps the executed
/// ZMP inside its bounds while the tail, replanned every cycle, may relax.
QpProblemd assemble_qp_soft(const TvPredictiond& pred, const HorizonPlan& plan,
                            const AxisStated& x_hat, double u_prev, double rho,
                            double slack_weight, int hard_window = 0);

/// Receding-horizon walking controller. Owns the phase clock, the pending
/// landing position and the previous jerk command; one control_step per
/// cycle, clock advanced separately by the caller.
class Controller {
 public:
  Controller(GaitSchedule schedule, ControllerConfig config);

  ControlOutput control_step(const AxisStated& x_hat_x,
                             const AxisStated& y_hat_y);

  /// Advance the phase clock by one sample; commits the pending landing
  /// when a step boundary is crossed.
  void advance();

  double time() const { return cycle_ * cfg_.sample_time; }
  int cycle() const { return cycle_; }

  /// Reference sample at the current clock, with the live pending landing.
  RefSample reference_now() const { return sample_reference(time()); }

  /// Nominal (unadjusted) landing position of walking step j.
  Eigen::Vector2d nominal_landing(int step) const;
  Eigen::Vector2d pending_landing() const { return pending_landing_; }

  /// DCM of the nominal closed loop at a cycle, recorded from a rollout of
  /// this controller with step adjustment disabled. Deviations from it are
  /// what the adjustment reacts to.
  Eigen::Vector2d nominal_dcm(int cycle) const;

  /// Reference DCM implied by the nominal plan (backward integration); the
  /// terminal cost of each cycle steers toward it.
  Eigen::Vector2d anchor_dcm(int cycle) const;

  const GaitSchedule& schedule() const { return sched_; }
  const ControllerConfig& config() const { return cfg_; }

  /// Per-axis horizon plan starting one sample after time t.
  HorizonPlan build_horizon(double t, int axis) const;

 private:
  struct PhaseInfo {
    Phase phase;
    int step;        // walking step index (1-based), 0 settle, walk_steps+1 stand
    double t_in_step;
  };

  struct NoReferenceRollout {};
  Controller(GaitSchedule schedule, ControllerConfig config,
             NoReferenceRollout);

  PhaseInfo phase_at(double t) const;
  RefSample sample_reference(double t) const;
  Eigen::Vector2d support_of_step(int step) const;
  Eigen::Vector2d landing_of_step(int step) const;
  double surface_of_step(int step) const;
  void build_anchor_table();
  void build_nominal_dcm_table();

  GaitSchedule sched_;
  ControllerConfig cfg_;
  std::vector<Footstep> committed_;     // schedule with applied adjustments
  Eigen::Vector2d pending_landing_{0, 0};
  int active_step_{0};
  Eigen::Vector2d u_prev_{0, 0};
  int cycle_{0};
  // Terminal anchor targets: the reference DCM from backward integration of
  // the nominal plan.
  Eigen::Matrix<double, Eigen::Dynamic, 2> dcm_anchor_;
  // Adjustment baseline: the DCM the nominal closed loop actually follows.
  Eigen::Matrix<double, Eigen::Dynamic, 2> dcm_nominal_;
};

}  // namespace tvmpc
