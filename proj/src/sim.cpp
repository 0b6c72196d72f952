#include "tvmpc/sim.hpp"

#include <algorithm>
#include <stdexcept>

namespace tvmpc {

AxisStated Plant::state(int axis,
                        std::span<const Disturbance> disturbances) const {
  AxisStated s = axes_[axis];
  for (const auto& d : disturbances) {
    if (time_ >= d.start && time_ < d.start + d.duration) {
      s.acc += d.force[axis] / mass_;
    }
  }
  return s;
}

void Plant::step(const Eigen::Vector2d& jerk,
                 std::span<const Disturbance> disturbances, double T) {
  if (!(T > 0.0)) {
    throw std::invalid_argument("Plant::step: T must be positive");
  }
  for (int axis = 0; axis < 2; ++axis) {
    AxisStated& s = axes_[axis];
    const double u = jerk[axis];
    const double pos = s.pos + s.vel * T + s.acc * T * T / 2.0 +
                       u * T * T * T / 6.0;
    const double vel = s.vel + s.acc * T + u * T * T / 2.0;
    const double acc = s.acc + u * T;
    s.pos = pos;
    s.vel = vel;
    s.acc = acc;

    for (const auto& d : disturbances) {
      const double o0 = std::max(d.start, time_) - time_;
      const double o1 = std::min(d.start + d.duration, time_ + T) - time_;
      if (o1 <= o0) continue;
      const double a_d = d.force[axis] / mass_;
      const double tau = o1 - o0;
      // Impulse a_d*tau applied over [o0, o1): exact velocity and position
      // contributions at the end of the cycle.
      s.vel += a_d * tau;
      s.pos += a_d * tau * (T - (o0 + o1) / 2.0);
    }
  }
  time_ += T;
}

Eigen::Vector2d measure(const Plant& plant,
                        std::span<const Disturbance> disturbances,
                        double omega, NoiseStream& noise) {
  Eigen::Vector2d out;
  for (int axis = 0; axis < 2; ++axis) {
    out[axis] = zmp_of_state(plant.state(axis, disturbances), omega) +
                noise.next();
  }
  return out;
}

}  // namespace tvmpc
