#include "tvmpc/gait.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tvmpc {

GaitSchedule make_diagonal_schedule(double step_length, double step_width,
                                    double foot_length, int walk_steps,
                                    double stair_rise) {
  if (walk_steps < 1) {
    throw std::invalid_argument("make_diagonal_schedule: walk_steps >= 1");
  }
  GaitSchedule sched;
  sched.nominal_step_length = step_length;
  sched.nominal_step_width = step_width;
  sched.foot_length = foot_length;

  // Initial stance pair astride the origin, then supports on a drifting
  // centerline: f_i = ((i-1) S_L, (i-1) S_w + side * S_w).
  sched.footsteps.push_back({{0.0, -step_width}, 0.0, false});
  for (int i = 1; i <= walk_steps + 1; ++i) {
    const bool left = (i % 2 == 1);
    Footstep f;
    f.position.x() = (i - 1) * step_length;
    f.position.y() = (i - 1) * step_width + (left ? step_width : -step_width);
    f.surface_z = (i >= 2) ? (i - 1) * stair_rise : 0.0;
    f.is_left = left;
    sched.footsteps.push_back(f);
  }
  return sched;
}

double zmp_reference(double t, const GaitTiming& timing, double foot,
                     double step_len) {
  if (timing.in_single_support(t)) {
    return foot;
  }
  return foot + (t - timing.t_ss) / timing.t_ds * step_len;
}

VerticalSample vertical_reference(double t, const GaitTiming& timing,
                                  const VerticalParams& vp, double support_z) {
  constexpr double pi = std::numbers::pi;
  VerticalSample out;
  if (timing.in_single_support(t)) {
    const double k = pi / timing.t_ss;
    out.z = support_z + vp.z_c0 + vp.a_ss * std::sin(k * t);
    out.vel = vp.a_ss * k * std::cos(k * t);
    out.acc = -vp.a_ss * k * k * std::sin(k * t);
  } else {
    const double tau = t - timing.t_ss;
    const double k = pi / timing.t_ds;
    const double slope = vp.delta_z_c / timing.t_ds;
    out.z = support_z + vp.z_c0 + vp.a_ds * std::sin(k * tau) + slope * tau;
    out.vel = vp.a_ds * k * std::cos(k * tau) + slope;
    out.acc = -vp.a_ds * k * k * std::sin(k * tau);
  }
  return out;
}

double adjust_step(double dcm, double foot, double t, const GaitTiming& timing,
                   double omega, double compliance_margin, double reach_lo,
                   double reach_hi, double nominal) {
  const double remaining = timing.step_duration() - t;
  const double raw = (dcm - foot) * std::exp(omega * remaining);
  if (std::abs(raw - nominal) <= compliance_margin) {
    return nominal;
  }
  return std::clamp(raw, reach_lo, reach_hi);
}

}  // namespace tvmpc
