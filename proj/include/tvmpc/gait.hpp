#pragma once

#include <Eigen/Dense>

#include <vector>

namespace tvmpc {

/// Single/double support durations of one step. The phase clock t lives in
/// [0, t_ss + t_ds) and is owned by the controller.
struct GaitTiming {
  double t_ss{1.5};
  double t_ds{0.5};

  double step_duration() const { return t_ss + t_ds; }
  bool in_single_support(double t) const { return t < t_ss; }
};

struct Footstep {
  Eigen::Vector2d position{0, 0};
  double surface_z{0};
  bool is_left{false};
};

/// Planned support sequence. footsteps[0] and footsteps[1] are the initial
/// stance pair; walking step j uses footsteps[j] as support and lands on
/// footsteps[j+1].
struct GaitSchedule {
  std::vector<Footstep> footsteps;
  double nominal_step_length{0.2};   // S_L
  double nominal_step_width{0.1};    // S_w
  double foot_length{0.075};         // L_f
};

/// Diagonal-walk schedule: supports advance step_length in x each step while
/// alternating +-step_width about a centerline that drifts step_width per
/// step. stair_rise lifts every landing from the second walking step on.
GaitSchedule make_diagonal_schedule(double step_length, double step_width,
                                    double foot_length, int walk_steps,
                                    double stair_rise = 0.0);

/// Sinusoidal COM-height motion per step.
struct VerticalParams {
  double z_c0{1.0};
  double a_ss{0.0135};
  double a_ds{0.00135};
  double delta_z_c{0.0};
};

struct VerticalSample {
  double z{0};    // absolute height (support_z included)
  double vel{0};
  double acc{0};
};

/// Piecewise ZMP reference within one step: the support center during single
/// support, then a linear ramp covering step_len during double support.
double zmp_reference(double t, const GaitTiming& timing, double foot,
                     double step_len);

/// COM height reference and its analytic derivatives at phase time t,
/// offset by the support surface height.
VerticalSample vertical_reference(double t, const GaitTiming& timing,
                                  const VerticalParams& vp, double support_z);

/// Dead band and saturation for the DCM step adjustment. The reach bounds
/// are per-axis intervals on the landing offset relative to the stance foot;
/// the y interval is stated for a leftward step and mirrored by the caller
/// when stepping right.
struct StepAdjustPolicy {
  double compliance_margin{0.02};
  Eigen::Vector2d reach_min{-0.4, 0.05};
  Eigen::Vector2d reach_max{0.4, 0.3};
};

/// DCM extrapolation of the step length: (dcm - foot) * exp(w * remaining).
/// Returns `nominal` when the raw value is within the compliance margin of
/// it, otherwise the raw value clamped into [reach_lo, reach_hi].
double adjust_step(double dcm, double foot, double t, const GaitTiming& timing,
                   double omega, double compliance_margin, double reach_lo,
                   double reach_hi, double nominal);

}  // namespace tvmpc
