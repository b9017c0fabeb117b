#include <doctest.h>

#include <cmath>

#include "aicau/errors.hpp"
#include "aicau/linalg.hpp"
#include "aicau/quadratic.hpp"

using namespace aicau;

namespace {

double planted(double x1, double x2) { return std::sin(0.5 * x1) + 0.5 * std::cos(0.5 * x2); }

Eigen::MatrixXd random_points(Rng& rng, int n) {
  Eigen::MatrixXd x(n, 2);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = 2 * M_PI * rng.uniform();
  return x;
}

Eigen::VectorXd field(const Eigen::MatrixXd& x) {
  Eigen::VectorXd d(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) d(i) = planted(x(i, 0), x(i, 1));
  return d;
}

struct Fitted {
  QuadraticEstimator estimator;
  Eigen::MatrixXd train;
  Eigen::MatrixXd test;
};

const Fitted& planted_fit() {
  static const Fitted fitted = [] {
    Rng rng(31);
    Fitted f;
    f.train = random_points(rng, 40);
    f.test = random_points(rng, 60);
    QuadraticEstimatorConfig config;
    config.rng_seed = 5;
    f.estimator = QuadraticEstimator(config);
    f.estimator.fit(f.train, rank_one_targets(field(f.train)));
    return f;
  }();
  return fitted;
}

}  // namespace

TEST_SUITE("quadratic") {

TEST_CASE("rank_one_targets covers the lower triangle with the diagonal") {
  const auto t = rank_one_targets(Eigen::Vector3d(1, 2, 3));
  REQUIRE(t.size() == 6);
  for (const auto& p : t) {
    CHECK(p.a >= p.b);
    CHECK(p.value == static_cast<double>((p.a + 1) * (p.b + 1)));
  }
}

TEST_CASE("embedding network gradient matches central differences") {
  QuadraticEstimatorConfig config;
  config.hidden_sizes = {6, 5};
  config.embedding_dim = 3;
  config.dropout = 0.0;
  Rng rng(9);
  EmbeddingNetwork net(4, config, rng);
  Eigen::MatrixXd x(4, 7);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  Eigen::MatrixXd w(3, 7);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.normal();
  // loss = sum(w .* psi(x)) in training mode (batch statistics).
  auto loss = [&] { return (net.forward_train(x, nullptr).array() * w.array()).sum(); };
  loss();
  const auto grads = net.backward(w);
  auto params = net.parameters();
  REQUIRE(grads.size() == params.size());
  const double h = 1e-5;
  int checked = 0;
  for (std::size_t p = 0; p < params.size(); ++p) {
    for (Eigen::Index k = 0; k < params[p]->size(); ++k) {
      double& v = params[p]->data()[k];
      const double saved = v;
      v = saved + h;
      const double up = loss();
      v = saved - h;
      const double down = loss();
      v = saved;
      const double numeric = (up - down) / (2 * h);
      const double analytic = grads[p].data()[k];
      if (std::abs(numeric) < 1e-7 && std::abs(analytic) < 1e-7) continue;
      CHECK(std::abs(numeric - analytic) <= 1e-4 * std::max(std::abs(numeric), 1e-3));
      ++checked;
    }
  }
  CHECK(checked > 30);
}

TEST_CASE("predictions are exactly symmetric") {
  const auto& f = planted_fit();
  Rng rng(1);
  for (int t = 0; t < 1000; ++t) {
    Eigen::VectorXd a(2), b(2);
    a << 2 * M_PI * rng.uniform(), 2 * M_PI * rng.uniform();
    b << 2 * M_PI * rng.uniform(), 2 * M_PI * rng.uniform();
    CHECK(f.estimator.q(a, b) == f.estimator.q(b, a));
  }
}

TEST_CASE("predicted sub-matrices are positive semi-definite") {
  const auto& f = planted_fit();
  Rng rng(2);
  for (int t = 0; t < 10; ++t) {
    const Eigen::MatrixXd m = f.estimator.predict_matrix(random_points(rng, 20));
    const double scale = std::max(m.cwiseAbs().maxCoeff(), 1.0);
    CHECK(sym_eigen(m).values.minCoeff() >= -1e-6 * scale);
    CHECK((m - m.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("held-out entries of a planted rank-one field") {
  const auto& f = planted_fit();
  const Eigen::VectorXd d = field(f.test);
  const Eigen::MatrixXd truth = d * d.transpose();
  const Eigen::MatrixXd pred = f.estimator.predict_matrix(f.test);
  double ss_res = 0.0, ss_tot = 0.0, mean = 0.0;
  long count = 0;
  for (Eigen::Index a = 0; a < truth.rows(); ++a) {
    for (Eigen::Index b = 0; b <= a; ++b) {
      mean += truth(a, b);
      ++count;
    }
  }
  mean /= static_cast<double>(count);
  for (Eigen::Index a = 0; a < truth.rows(); ++a) {
    for (Eigen::Index b = 0; b <= a; ++b) {
      ss_res += std::pow(pred(a, b) - truth(a, b), 2);
      ss_tot += std::pow(truth(a, b) - mean, 2);
    }
  }
  const double r2 = 1.0 - ss_res / ss_tot;
  MESSAGE("held-out R2 = " << r2);
  CHECK(r2 > 0.8);
}

TEST_CASE("validation loss drives early stopping") {
  const auto& f = planted_fit();
  CHECK_FALSE(f.estimator.validation_losses().empty());
  CHECK(f.estimator.validation_losses().size() == f.estimator.train_losses().size());
  CHECK(f.estimator.train_losses().size() <= 2000);
}

TEST_CASE("fit is deterministic") {
  Rng rng(4);
  const Eigen::MatrixXd x = random_points(rng, 12);
  QuadraticEstimatorConfig config;
  config.max_epochs = 50;
  QuadraticEstimator a(config), b(config);
  a.fit(x, rank_one_targets(field(x)));
  b.fit(x, rank_one_targets(field(x)));
  CHECK(a.predict_matrix(x) == b.predict_matrix(x));
}

TEST_CASE("fit preconditions") {
  QuadraticEstimator e;
  CHECK_THROWS_AS(e.fit(Eigen::MatrixXd::Zero(1, 2), {{0, 0, 1.0}}), InvalidStateError);
  CHECK_THROWS_AS(e.fit(Eigen::MatrixXd::Zero(3, 2), {{5, 0, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(e.embed(Eigen::MatrixXd::Zero(1, 2)), InvalidStateError);
}

}  // TEST_SUITE
