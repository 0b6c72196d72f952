#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <vector>

#include "tvmpc/prediction.hpp"

using namespace tvmpc;

namespace {

// Sequential rollout under absolute inputs, the input held after the last
// entry. Independent of the condensed builders.
Eigen::VectorXd rollout_absolute(const DiscreteModeld& m, int np,
                                 const Eigen::Vector3d& x0,
                                 const Eigen::VectorXd& u) {
  Eigen::VectorXd y(np);
  Eigen::Vector3d x = x0;
  for (int j = 0; j < np; ++j) {
    const double uj = u[std::min<int>(j, u.size() - 1)];
    x = m.A * x + m.B * uj;
    y[j] = m.output_row().dot(x);
  }
  return y;
}

// Sequential rollout in the incremental convention u(k) = u(k-1) + du(k).
Eigen::VectorXd rollout_incremental(const std::vector<DiscreteModeld>& models,
                                    const Eigen::Vector3d& x0, double u_prev,
                                    const Eigen::VectorXd& du) {
  Eigen::VectorXd y(models.size());
  Eigen::Vector3d x = x0;
  double u = u_prev;
  for (size_t j = 0; j < models.size(); ++j) {
    if (static_cast<Eigen::Index>(j) < du.size()) u += du[j];
    x = models[j].A * x + models[j].B * u;
    y[static_cast<Eigen::Index>(j)] = models[j].output_row().dot(x);
  }
  return y;
}

}  // namespace

TEST_CASE("lti prediction, single sample") {
  const auto m = discretize(0.02, 3.132092);
  const auto pred = build_lti(m, {1, 1});
  CHECK((pred.F.row(0).transpose() -
         (m.output_row() * m.A).transpose())
            .norm() < 1e-15);
  CHECK(pred.Phi(0, 0) == doctest::Approx(m.output_row().dot(m.B))
                              .epsilon(1e-15));
}

TEST_CASE("lti prediction equals sequential rollout with held input") {
  const auto m = discretize(0.02, 3.132092);
  const auto pred = build_lti(m, {3, 2});
  Eigen::VectorXd u(2);
  u << 0.5, -0.2;  // third input held at -0.2

  for (const Eigen::Vector3d& x0 :
       {Eigen::Vector3d(0.0, 0.0, 0.0), Eigen::Vector3d(0.1, -0.05, 0.3)}) {
    const Eigen::VectorXd y_mat = pred.F * x0 + pred.Phi * u;
    const Eigen::VectorXd y_seq = rollout_absolute(m, 3, x0, u);
    CHECK((y_mat - y_seq).lpNorm<Eigen::Infinity>() < 1e-12);
  }
}

TEST_CASE("lti prediction is zero for zero state and inputs") {
  const auto m = discretize(0.05, 3.0);
  const auto pred = build_lti(m, {6, 3});
  const Eigen::VectorXd y =
      pred.F * Eigen::Vector3d::Zero() + pred.Phi * Eigen::Vector3d::Zero();
  CHECK(y.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("tv prediction with equal models reduces to the lti case") {
  const auto m = discretize(0.02, 3.132092);
  const std::vector<DiscreteModeld> models(5, m);
  const HorizonDims dims{5, 3};
  const auto tv = build_tv<double>(models, dims);
  const auto lti = build_lti(m, dims);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Vector3d x0(uni(rng), uni(rng), uni(rng));
    Eigen::VectorXd du(3);
    du << uni(rng), uni(rng), uni(rng);
    // Absolute inputs are the cumulative sums when u(-1) = 0.
    Eigen::VectorXd u(3);
    u[0] = du[0];
    u[1] = du[0] + du[1];
    u[2] = du[0] + du[1] + du[2];
    const Eigen::VectorXd y_tv = tv.Sx * x0 + tv.Su * du;
    const Eigen::VectorXd y_lti = lti.F * x0 + lti.Phi * u;
    CHECK((y_tv - y_lti).lpNorm<Eigen::Infinity>() < 1e-12);
  }
}

TEST_CASE("tv prediction matches rollout on a stair-like omega series") {
  std::vector<DiscreteModeld> models;
  for (const double omega : {3.132, 3.132, 2.99, 2.99}) {
    models.push_back(discretize(0.02, omega));
  }
  const HorizonDims dims{4, 2};
  const auto tv = build_tv<double>(models, dims);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Vector3d x0(uni(rng), uni(rng), uni(rng));
    const double u_prev = uni(rng);
    Eigen::VectorXd du(2);
    du << uni(rng), uni(rng);
    const Eigen::VectorXd y_mat = tv.Sx * x0 + tv.Su1 * u_prev + tv.Su * du;
    const Eigen::VectorXd y_ref = rollout_incremental(models, x0, u_prev, du);
    CHECK((y_mat - y_ref).lpNorm<Eigen::Infinity>() < 1e-10);
  }
}

TEST_CASE("tv prediction with zero increments holds the previous input") {
  std::vector<DiscreteModeld> models;
  for (const double omega : {3.0, 3.2, 3.4}) {
    models.push_back(discretize(0.03, omega));
  }
  const auto tv = build_tv<double>(models, {3, 2});
  const Eigen::Vector3d x0(0.02, -0.1, 0.4);
  const Eigen::VectorXd y_mat =
      tv.Sx * x0 + tv.Su1 * 0.3 + tv.Su * Eigen::Vector2d::Zero();
  const Eigen::VectorXd y_ref =
      rollout_incremental(models, x0, 0.3, Eigen::Vector2d::Zero());
  CHECK((y_mat - y_ref).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("oracle equivalence over random time-varying instances") {
  std::mt19937_64 rng(20240901);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int np = 1 + static_cast<int>(uni(rng) * 10) % 10;
    const int nc = 1 + static_cast<int>(uni(rng) * np) % np;
    const double T = 0.005 + 0.045 * uni(rng);
    std::vector<DiscreteModeld> models;
    for (int i = 0; i < np; ++i) {
      models.push_back(discretize(T, 2.5 + 1.5 * uni(rng)));
    }
    const Eigen::Vector3d x0(2 * uni(rng) - 1, 2 * uni(rng) - 1,
                             2 * uni(rng) - 1);
    const double u_prev = 2 * uni(rng) - 1;
    Eigen::VectorXd du(nc);
    for (int j = 0; j < nc; ++j) du[j] = 2 * uni(rng) - 1;

    const auto tv = build_tv<double>(models, {np, nc});
    const Eigen::VectorXd y_mat = tv.Sx * x0 + tv.Su1 * u_prev + tv.Su * du;
    const Eigen::VectorXd y_ref = rollout_incremental(models, x0, u_prev, du);
    worst =
        std::max(worst, (y_mat - y_ref).lpNorm<Eigen::Infinity>());
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("Su is causal: column j only affects rows >= j") {
  std::vector<DiscreteModeld> models;
  for (int i = 0; i < 6; ++i) {
    models.push_back(discretize(0.02, 2.5 + 0.2 * i));
  }
  const auto tv = build_tv<double>(models, {6, 4});
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (j > i) CHECK(tv.Su(i, j) == 0.0);
      if (j <= i) CHECK(tv.Su(i, j) != 0.0);
    }
  }
}

TEST_CASE("tv builder rejects a length mismatch") {
  const std::vector<DiscreteModeld> models(3, discretize(0.02, 3.0));
  CHECK_THROWS_AS((void)build_tv<double>(models, {4, 2}),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)build_tv<double>(models, {3, 4}),
                  std::invalid_argument);
}
