#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "tvmpc/estimator.hpp"

using namespace tvmpc;

TEST_CASE("predict propagates exactly when Q is zero") {
  const auto model = discretize(0.02, 3.132092);
  KfStated s = KfStated::with_defaults({0.1, -0.2, 0.5});
  s.Q.setZero();

  Eigen::Vector3d truth(0.1, -0.2, 0.5);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const double u = uni(rng);
    truth = model.A * truth + model.B * u;
    s = kf_predict(s, u, model);
    CHECK((s.x_hat.vector() - truth).lpNorm<Eigen::Infinity>() < 1e-14);
  }
}

TEST_CASE("predict keeps the origin fixed and grows the covariance") {
  const auto model = discretize(0.02, 3.0);
  KfStated s = KfStated::with_defaults();
  const Eigen::Matrix3d prior = s.P;
  const auto next = kf_predict(s, 0.0, model);
  CHECK(next.x_hat.vector().lpNorm<Eigen::Infinity>() == 0.0);
  const Eigen::Matrix3d propagated = model.A * prior * model.A.transpose();
  CHECK(next.P.trace() >= propagated.trace());
}

TEST_CASE("near-exact measurement pins the estimated zmp") {
  KfStated s = KfStated::with_defaults({0.05, 0.0, 0.2});
  s.R = 1e-12;
  const double omega = 3.132092;
  const double y = 0.12;
  const auto post = kf_update(s, y, omega);
  CHECK(std::abs(zmp_of_state(post.x_hat, omega) - y) < 1e-6);
}

TEST_CASE("zero innovation leaves the estimate unchanged") {
  KfStated s = KfStated::with_defaults({0.03, -0.4, 0.7});
  const double omega = 3.0;
  const double y = zmp_of_state(s.x_hat, omega);
  const auto post = kf_update(s, y, omega);
  CHECK((post.x_hat.vector() - s.x_hat.vector()).lpNorm<Eigen::Infinity>() <
        1e-12);
}

TEST_CASE("update contracts the covariance along the measured direction") {
  KfStated s = KfStated::with_defaults({0.0, 0.0, 0.0});
  const double omega = 3.132092;
  Eigen::RowVector3d c;
  c << 1.0, 0.0, -1.0 / (omega * omega);
  const auto post = kf_update(s, 0.01, omega);
  const double before = c.dot(s.P * c.transpose());
  const double after = c.dot(post.P * c.transpose());
  CHECK(after <= before + 1e-15);
}

TEST_CASE("noisy constant-state stream beats the raw measurement rms") {
  // Robot at rest: the ZMP equals the position. Uniform noise in +-0.02 m.
  const double truth_pos = 0.1;
  const auto model = discretize(0.02, 3.132092);
  KfStated s = KfStated::with_defaults({truth_pos, 0.0, 0.0});

  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> noise(-0.02, 0.02);
  double meas_sq = 0.0;
  double est_sq = 0.0;
  const int n = 500;
  for (int k = 0; k < n; ++k) {
    const double y = truth_pos + noise(rng);
    s = kf_update(s, y, model.omega);
    meas_sq += (y - truth_pos) * (y - truth_pos);
    const double err = s.x_hat.pos - truth_pos;
    est_sq += err * err;
    s = kf_predict(s, 0.0, model);
  }
  const double meas_rms = std::sqrt(meas_sq / n);
  const double est_rms = std::sqrt(est_sq / n);
  CHECK(est_rms < meas_rms);
}

TEST_CASE("zero noise and exact init track the plant exactly") {
  const auto model = discretize(0.02, 3.132092);
  KfStated s = KfStated::with_defaults({0.0, 0.0, 0.0});
  Eigen::Vector3d truth(0.0, 0.0, 0.0);

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> uni(-1.5, 1.5);
  for (int k = 0; k < 2000; ++k) {
    const double y = zmp_of_state(AxisStated::from_vector(truth), model.omega);
    s = kf_update(s, y, model.omega);
    CHECK((s.x_hat.vector() - truth).lpNorm<Eigen::Infinity>() <= 1e-9);
    const double u = uni(rng);
    truth = model.A * truth + model.B * u;
    s = kf_predict(s, u, model);
  }
}

TEST_CASE("covariance stays symmetric and converges") {
  const auto model = discretize(0.02, 3.132092);
  KfStated s = KfStated::with_defaults();
  Eigen::Matrix3d prev = s.P;
  double max_asym = 0.0;
  double final_diff = 1.0;
  for (int k = 0; k < 100000; ++k) {
    s = kf_update(s, 0.0, model.omega);
    s = kf_predict(s, 0.0, model);
    max_asym = std::max(
        max_asym, (s.P - s.P.transpose()).lpNorm<Eigen::Infinity>());
    final_diff = (s.P - prev).norm();
    prev = s.P;
  }
  CHECK(max_asym <= 1e-12);
  CHECK(final_diff < 1e-10);
}

TEST_CASE("degenerate innovation covariance is reported") {
  KfStated s = KfStated::with_defaults();
  s.P.setZero();
  s.R = 0.0;
  CHECK_THROWS_AS((void)kf_update(s, 0.1, 3.0), std::runtime_error);
}
