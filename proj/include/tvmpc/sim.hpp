#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>

#include "tvmpc/model.hpp"

namespace tvmpc {

/// Horizontal push at the COM over a time window.
struct Disturbance {
  Eigen::Vector2d force{0, 0};  // N, per axis
  double start{0};              // s
  double duration{0.01};        // s
};

struct NoiseSpec {
  double bound{0};   // clip level, m
  double sigma{0};   // std dev before clipping, m
  std::uint64_t seed{0};
};

/// Deterministic truncated-Gaussian stream; one sample per call.
class NoiseStream {
 public:
  explicit NoiseStream(const NoiseSpec& spec)
      : spec_(spec), rng_(spec.seed), normal_(0.0, 1.0) {}

  double next() {
    if (spec_.sigma <= 0.0) return 0.0;
    const double v = spec_.sigma * normal_(rng_);
    return std::clamp(v, -spec_.bound, spec_.bound);
  }

 private:
  NoiseSpec spec_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_;
};

/// Point-mass plant: one jerk-driven triple integrator per horizontal axis,
/// advanced exactly each cycle. Pushes enter as an extra acceleration over
/// their window; the impulse and its position effect are integrated exactly
/// for partial overlaps.
class Plant {
 public:
  Plant(const AxisStated& x0, const AxisStated& y0, double mass)
      : mass_(mass), time_(0.0) {
    axes_[0] = x0;
    axes_[1] = y0;
  }

  double time() const { return time_; }
  double mass() const { return mass_; }

  /// State with the instantaneous acceleration, including any disturbance
  /// active at the current time.
  AxisStated state(int axis, std::span<const Disturbance> disturbances) const;

  /// Advance one cycle of length T under the given jerk commands.
  void step(const Eigen::Vector2d& jerk,
            std::span<const Disturbance> disturbances, double T);

 private:
  AxisStated axes_[2];  // acc holds the jerk integral only
  double mass_;
  double time_;
};

/// Noisy ZMP measurement of both axes under the assumed omega. Draws one
/// noise sample per axis, x first.
Eigen::Vector2d measure(const Plant& plant,
                        std::span<const Disturbance> disturbances,
                        double omega, NoiseStream& noise);

}  // namespace tvmpc
