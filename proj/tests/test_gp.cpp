#include <doctest.h>

#include <cmath>

#include "aicau/errors.hpp"
#include "aicau/gp.hpp"
#include "aicau/rng.hpp"

using namespace aicau;

namespace {

double r_squared(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
  const double ss_res = (pred - truth).squaredNorm();
  const double ss_tot = (truth.array() - truth.mean()).matrix().squaredNorm();
  return 1.0 - ss_res / ss_tot;
}

}  // namespace

TEST_SUITE("gp") {

TEST_CASE("constant targets give a constant prediction") {
  Eigen::MatrixXd x(5, 2);
  x << 0, 0, 1, 0, 0, 1, 2, 2, 3, 1;
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(5, 0.42);
  Eigen::MatrixXd q(3, 2);
  q << 5, 5, -1, 0, 0.5, 0.5;
  const Eigen::VectorXd pred = direct_fit_predict({}, x, y, q);
  CHECK((pred.array() - 0.42).abs().maxCoeff() < 1e-12);
  GaussianProcess gp;
  gp.fit(x, y);
  CHECK(gp.degenerate());
}

TEST_CASE("held-out R2 on a smooth linear field") {
  Rng rng(12);
  const int n_train = 50, n_test = 100;
  Eigen::MatrixXd x(n_train + n_test, 4);
  Eigen::VectorXd y(n_train + n_test);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (int d = 0; d < 4; ++d) x(i, d) = 2 * M_PI * rng.uniform();
    y(i) = 0.5 * x(i, 0) - 0.3 * x(i, 1) + 0.1 * x(i, 2) + 1.0;
  }
  const Eigen::VectorXd pred = direct_fit_predict({}, x.topRows(n_train), y.head(n_train),
                                                  x.bottomRows(n_test));
  CHECK(r_squared(pred, y.tail(n_test)) > 0.9);
}

TEST_CASE("posterior mean interpolates the training targets") {
  Rng rng(3);
  Eigen::MatrixXd x(30, 2);
  Eigen::VectorXd y(30);
  for (int i = 0; i < 30; ++i) {
    x(i, 0) = 6 * rng.uniform();
    x(i, 1) = 6 * rng.uniform();
    y(i) = std::sin(x(i, 0)) * std::cos(0.5 * x(i, 1));
  }
  GaussianProcess gp;
  gp.fit(x, y);
  const Eigen::VectorXd standardized =
      (gp.predict(x).array() - gp.target_mean()) / gp.target_scale();
  const Eigen::VectorXd target = (y.array() - gp.target_mean()) / gp.target_scale();
  CHECK((standardized - target).cwiseAbs().maxCoeff() < 10 * std::sqrt(1e-6));
}

TEST_CASE("hyperparameters stay inside their bounds") {
  Rng rng(8);
  Eigen::MatrixXd x(25, 3);
  Eigen::VectorXd y(25);
  for (int i = 0; i < 25; ++i) {
    for (int d = 0; d < 3; ++d) x(i, d) = rng.normal();
    y(i) = rng.normal();
  }
  DirectEstimatorConfig config;
  GaussianProcess gp(config);
  gp.fit(x, y);
  CHECK(gp.constant() >= config.constant_lower * (1 - 1e-9));
  CHECK(gp.constant() <= config.constant_upper * (1 + 1e-9));
  CHECK(gp.length_scales().minCoeff() >= config.length_lower * (1 - 1e-9));
  CHECK(gp.length_scales().maxCoeff() <= config.length_upper * (1 + 1e-9));
}

TEST_CASE("log marginal likelihood gradient matches finite differences") {
  Rng rng(4);
  Eigen::MatrixXd x(15, 2);
  Eigen::VectorXd y(15);
  for (int i = 0; i < 15; ++i) {
    x(i, 0) = rng.normal();
    x(i, 1) = rng.normal();
    y(i) = x(i, 0) * x(i, 0) - x(i, 1);
  }
  DirectEstimatorConfig config;
  config.alpha = 1e-2;
  GaussianProcess gp(config);
  gp.fit(x, y);
  Eigen::VectorXd theta(3);
  theta << 0.3, -0.2, 0.5;
  Eigen::VectorXd grad;
  gp.log_marginal_likelihood(theta, &grad);
  for (int k = 0; k < 3; ++k) {
    Eigen::VectorXd up = theta, down = theta;
    up(k) += 1e-5;
    down(k) -= 1e-5;
    const double numeric =
        (gp.log_marginal_likelihood(up) - gp.log_marginal_likelihood(down)) / 2e-5;
    CHECK(grad(k) == doctest::Approx(numeric).epsilon(1e-4));
  }
}

TEST_CASE("fits are deterministic given the seed") {
  Rng rng(6);
  Eigen::MatrixXd x(20, 2);
  Eigen::VectorXd y(20);
  for (int i = 0; i < 20; ++i) {
    x(i, 0) = rng.normal();
    x(i, 1) = rng.normal();
    y(i) = std::tanh(x(i, 0));
  }
  DirectEstimatorConfig config;
  config.rng_seed = 77;
  CHECK(direct_fit_predict(config, x, y, x) == direct_fit_predict(config, x, y, x));
}

TEST_CASE("fit validates its inputs") {
  GaussianProcess gp;
  CHECK_THROWS_AS(gp.fit(Eigen::MatrixXd::Zero(1, 2), Eigen::VectorXd::Zero(1)),
                  InvalidStateError);
  CHECK_THROWS_AS(gp.fit(Eigen::MatrixXd::Zero(3, 2), Eigen::VectorXd::Zero(2)),
                  std::invalid_argument);
}

}  // TEST_SUITE
