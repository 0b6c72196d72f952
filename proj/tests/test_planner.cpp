#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "tvmpc/planner.hpp"
#include "tvmpc/sim.hpp"

using namespace tvmpc;

namespace {

ControllerConfig table_one_config(int walk_steps) {
  ControllerConfig cc;
  cc.timing = {1.5, 0.5};
  cc.vertical = {1.0, 0.0135, 0.00135, 0.0};
  cc.dims = {50, 2};
  cc.sample_time = 0.02;
  cc.walk_steps = walk_steps;
  return cc;
}

Controller table_one_controller(int walk_steps, double stair_rise = 0.0,
                                double delta_z_c = 0.0) {
  ControllerConfig cc = table_one_config(walk_steps);
  cc.vertical.delta_z_c = delta_z_c;
  return Controller(
      make_diagonal_schedule(0.2, 0.1, 0.075, walk_steps, stair_rise), cc);
}

std::vector<DiscreteModeld> models_for(const HorizonPlan& plan, double T) {
  std::vector<DiscreteModeld> models;
  for (int i = 0; i < plan.omega.size(); ++i) {
    models.push_back(discretize(T, plan.omega[i]));
  }
  return models;
}

}  // namespace

TEST_CASE("single-sample qp reproduces the output-matching jerk") {
  const std::vector<DiscreteModeld> models{discretize(0.02, 3.132092)};
  const auto pred = build_tv<double>(models, {1, 1});

  HorizonPlan plan;
  plan.zmp_ref = Eigen::VectorXd::Constant(1, 0.05);
  plan.omega = Eigen::VectorXd::Constant(1, 3.132092);
  plan.zmp_lo = Eigen::VectorXd::Constant(1, -1e6);
  plan.zmp_hi = Eigen::VectorXd::Constant(1, 1e6);
  plan.u_min = -1e6;
  plan.u_max = 1e6;
  plan.du_min = -1e6;
  plan.du_max = 1e6;

  const AxisStated x_hat{0.01, 0.1, -0.2};
  const double u_prev = 0.3;
  const auto sol = solve_qp(assemble_qp(pred, plan, x_hat, u_prev, 0.0));
  REQUIRE(sol.status == QpStatus::optimal);
  const double y =
      pred.Sx.row(0).dot(x_hat.vector()) + pred.Su1[0] * u_prev +
      pred.Su(0, 0) * sol.z[0];
  CHECK(y == doctest::Approx(0.05).epsilon(1e-9));
}

TEST_CASE("qp hessian is symmetric and positive semidefinite beyond rho") {
  std::vector<DiscreteModeld> models;
  for (int i = 0; i < 6; ++i) models.push_back(discretize(0.02, 2.6 + 0.2 * i));
  const auto pred = build_tv<double>(models, {6, 3});

  HorizonPlan plan;
  plan.zmp_ref = Eigen::VectorXd::LinSpaced(6, 0.0, 0.3);
  plan.omega = Eigen::VectorXd::Constant(6, 3.0);
  plan.zmp_lo = Eigen::VectorXd::Constant(6, -1.0);
  plan.zmp_hi = Eigen::VectorXd::Constant(6, 1.0);

  const double rho = 1e-6;
  const auto p = assemble_qp(pred, plan, {0.1, -0.2, 0.3}, 0.05, rho);
  CHECK((p.H - p.H.transpose()).lpNorm<Eigen::Infinity>() == 0.0);
  const Eigen::MatrixXd gram =
      p.H - 2.0 * rho * Eigen::MatrixXd::Identity(3, 3);
  const Eigen::VectorXd eig =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram).eigenvalues();
  CHECK(eig.minCoeff() >= -1e-10);
}

TEST_CASE("qp minimizer matches a dense grid search over the rate box") {
  std::vector<DiscreteModeld> models;
  for (const double w : {3.1, 3.0, 2.9}) models.push_back(discretize(0.02, w));
  const auto pred = build_tv<double>(models, {3, 2});

  HorizonPlan plan;
  plan.zmp_ref = Eigen::VectorXd::Constant(3, 0.4);  // far target binds rates
  plan.omega = Eigen::VectorXd::Constant(3, 3.0);
  plan.zmp_lo = Eigen::VectorXd::Constant(3, -10.0);
  plan.zmp_hi = Eigen::VectorXd::Constant(3, 10.0);
  plan.u_min = -1.5;
  plan.u_max = 1.5;
  plan.du_min = -0.1;
  plan.du_max = 0.1;

  const AxisStated x_hat{0.0, 0.05, 0.1};
  const double u_prev = 0.02;
  const double rho = 1e-6;
  const auto sol = solve_qp(assemble_qp(pred, plan, x_hat, u_prev, rho));
  REQUIRE(sol.status == QpStatus::optimal);

  const Eigen::VectorXd free_resp =
      pred.Sx * x_hat.vector() + pred.Su1 * u_prev;
  double best = 1e300;
  Eigen::Vector2d best_z(0, 0);
  for (int i = -100; i <= 100; ++i) {
    for (int j = -100; j <= 100; ++j) {
      const Eigen::Vector2d z(i * 1e-3, j * 1e-3);
      const Eigen::VectorXd y = free_resp + pred.Su * z;
      const double cost =
          (plan.zmp_ref - y).squaredNorm() + rho * z.squaredNorm();
      if (cost < best) {
        best = cost;
        best_z = z;
      }
    }
  }
  CHECK((sol.z - best_z).lpNorm<Eigen::Infinity>() < 2e-3);
}

TEST_CASE("horizon bounds in single support are the support box") {
  const Controller ctrl = table_one_controller(5);
  // Samples from t = 2.5 land inside step 1 single support until 3.5 s.
  const HorizonPlan plan_x = ctrl.build_horizon(2.5, 0);
  const HorizonPlan plan_y = ctrl.build_horizon(2.5, 1);
  // Sample 10 is at t = 2.72, mid single support of step 1 at (0, 0.1).
  CHECK(plan_x.zmp_lo[10] == doctest::Approx(-0.03375).epsilon(1e-12));
  CHECK(plan_x.zmp_hi[10] == doctest::Approx(0.03375).epsilon(1e-12));
  CHECK(plan_y.zmp_lo[10] == doctest::Approx(0.1 - 0.03375).epsilon(1e-12));
  CHECK(plan_y.zmp_hi[10] == doctest::Approx(0.1 + 0.03375).epsilon(1e-12));
  CHECK(plan_x.zmp_ref[10] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(plan_y.zmp_ref[10] == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("flat ground with no vertical motion gives a constant omega") {
  ControllerConfig cc = table_one_config(5);
  cc.vertical = {1.0, 0.0, 0.0, 0.0};
  const Controller ctrl(make_diagonal_schedule(0.2, 0.1, 0.075, 5, 0.0), cc);
  const HorizonPlan plan = ctrl.build_horizon(1.2, 0);
  const double expected = std::sqrt(9.81);
  for (int i = 0; i < plan.omega.size(); ++i) {
    CHECK(plan.omega[i] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("stair horizon omega follows the planned vertical motion") {
  const Controller ctrl = table_one_controller(5, 0.1, 0.1);
  const double t0 = 2.5;
  const HorizonPlan plan = ctrl.build_horizon(t0, 0);

  constexpr double pi = std::numbers::pi;
  double lo = 1e9;
  double hi = -1e9;
  for (int i = 1; i <= 50; ++i) {
    const double t = t0 + 0.02 * i;
    const int j = static_cast<int>(std::floor((t + 1e-9) / 2.0));
    const double t_in = t - 2.0 * j;
    double z_local = 1.0;
    double acc = 0.0;
    if (t_in < 1.5) {
      z_local += 0.0135 * std::sin(pi / 1.5 * t_in);
      acc = -0.0135 * std::pow(pi / 1.5, 2) * std::sin(pi / 1.5 * t_in);
    } else {
      const double tau = t_in - 1.5;
      z_local += 0.00135 * std::sin(pi / 0.5 * tau) + 0.1 / 0.5 * tau;
      acc = -0.00135 * std::pow(pi / 0.5, 2) * std::sin(pi / 0.5 * tau);
    }
    const double expected = std::sqrt((9.81 + acc) / z_local);
    CHECK(plan.omega[i - 1] == doctest::Approx(expected).epsilon(1e-12));
    lo = std::min(lo, plan.omega[i - 1]);
    hi = std::max(hi, plan.omega[i - 1]);
  }
  CHECK(hi - lo > 1e-3);  // genuinely time-varying
}

TEST_CASE("controller at rest commands nearly zero jerk") {
  Controller ctrl = table_one_controller(5);
  const AxisStated rest_x{0.0, 0.0, 0.0};
  const AxisStated rest_y{0.0, 0.0, 0.0};
  for (int k = 0; k < 10; ++k) {
    const ControlOutput out = ctrl.control_step(rest_x, rest_y);
    CHECK(std::abs(out.jerk[0]) < 1e-6);
    CHECK(std::abs(out.jerk[1]) < 1e-6);
    CHECK(out.qp_status[0] == QpStatus::optimal);
    ctrl.advance();
  }
}

TEST_CASE("closed loop to 0.5 s keeps the predicted zmp inside bounds") {
  Controller ctrl = table_one_controller(5);
  Plant plant({0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, 100.0);
  double u_prev[2] = {0.0, 0.0};

  for (int k = 0; k <= 25; ++k) {
    const AxisStated sx = plant.state(0, {});
    const AxisStated sy = plant.state(1, {});
    if (k == 25) {
      // Reconstruct and solve the cycle QP; every output row must hold.
      for (int axis = 0; axis < 2; ++axis) {
        const HorizonPlan plan = ctrl.build_horizon(ctrl.time(), axis);
        const auto models = models_for(plan, 0.02);
        const auto pred = build_tv<double>(models, ctrl.config().dims);
        const auto problem = assemble_qp(pred, plan, axis == 0 ? sx : sy,
                                         u_prev[axis], 1e-6);
        const auto sol = solve_qp(problem);
        REQUIRE(sol.status == QpStatus::optimal);
        const Eigen::VectorXd viol = problem.Aineq * sol.z - problem.bineq;
        CHECK(viol.maxCoeff() <= 1e-8);
      }
      break;
    }
    const ControlOutput out = ctrl.control_step(sx, sy);
    CHECK(out.qp_status[0] == QpStatus::optimal);
    CHECK(out.qp_status[1] == QpStatus::optimal);
    CHECK_FALSE(out.slack_used[0]);
    CHECK_FALSE(out.slack_used[1]);
    u_prev[0] = out.jerk[0];
    u_prev[1] = out.jerk[1];
    plant.step(out.jerk, {}, 0.02);
    ctrl.advance();
  }
}

TEST_CASE("receding horizon shifts consistently under constant references") {
  // Standing near equilibrium with constant references: the second move of
  // one cycle predicts the first move of the next.
  const auto model = discretize(0.02, 3.132092);
  const std::vector<DiscreteModeld> models(50, model);
  const HorizonDims dims{50, 2};
  const auto pred = build_tv<double>(models, dims);

  HorizonPlan plan;
  plan.zmp_ref = Eigen::VectorXd::Zero(50);
  plan.omega = Eigen::VectorXd::Constant(50, 3.132092);
  plan.zmp_lo = Eigen::VectorXd::Constant(50, -1e3);
  plan.zmp_hi = Eigen::VectorXd::Constant(50, 1e3);
  plan.u_min = -1e3;
  plan.u_max = 1e3;
  plan.du_min = -1e3;
  plan.du_max = 1e3;

  const Eigen::Vector3d x0(1e-3, 0.0, 0.0);
  const double u_prev = 0.0;
  const auto first =
      solve_qp(assemble_qp(pred, plan, AxisStated::from_vector(x0), u_prev,
                           1e-6));
  REQUIRE(first.status == QpStatus::optimal);

  const double u_applied = u_prev + first.z[0];
  const Eigen::Vector3d x1 = model.A * x0 + model.B * u_applied;
  const auto second =
      solve_qp(assemble_qp(pred, plan, AxisStated::from_vector(x1), u_applied,
                           1e-6));
  REQUIRE(second.status == QpStatus::optimal);
  CHECK(std::abs(second.z[0] - first.z[1]) < 1e-6);
}

TEST_CASE("a short schedule is rejected with the shortfall named") {
  ControllerConfig cc = table_one_config(5);
  const GaitSchedule sched = make_diagonal_schedule(0.2, 0.1, 0.075, 3, 0.0);
  CHECK_THROWS_WITH_AS(Controller(sched, cc),
                       doctest::Contains("need 7 footsteps"),
                       std::runtime_error);
}
