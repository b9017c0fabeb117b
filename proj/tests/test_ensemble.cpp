#include <doctest.h>

#include <cmath>

#include "aicau/ensemble.hpp"
#include "aicau/errors.hpp"
#include "aicau/nn.hpp"
#include "aicau/oracle.hpp"

using namespace aicau;

TEST_SUITE("ensemble") {

TEST_CASE("mlp gradient matches central differences") {
  Rng rng(17);
  Mlp net(2, {5, 4, 3}, 1, rng);
  Eigen::MatrixXd x(2, 7);
  Eigen::MatrixXd y(1, 7);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = rng.normal();
  std::vector<Eigen::MatrixXd> grads;
  net.loss_and_gradient(x, y, grads);
  auto params = net.parameters();
  REQUIRE(grads.size() == params.size());
  const double h = 1e-5;
  int checked = 0;
  for (std::size_t p = 0; p < params.size(); ++p) {
    for (Eigen::Index k = 0; k < params[p]->size(); ++k) {
      double& w = params[p]->data()[k];
      const double saved = w;
      std::vector<Eigen::MatrixXd> unused;
      w = saved + h;
      const double up = net.loss_and_gradient(x, y, unused);
      w = saved - h;
      const double down = net.loss_and_gradient(x, y, unused);
      w = saved;
      const double numeric = (up - down) / (2 * h);
      const double analytic = grads[p].data()[k];
      // Skip entries sitting on a ReLU kink.
      if (std::abs(numeric) < 1e-7 && std::abs(analytic) < 1e-7) continue;
      CHECK(std::abs(numeric - analytic) <= 1e-4 * std::max(std::abs(numeric), 1e-3));
      ++checked;
    }
  }
  CHECK(checked > 20);
}

TEST_CASE("flat parameters round trip") {
  Rng rng(2);
  Mlp net(2, {3}, 1, rng);
  Eigen::VectorXd flat = net.flat_parameters();
  flat.array() += 1.0;
  net.set_flat_parameters(flat);
  CHECK(net.flat_parameters() == flat);
  const Mlp copy = Mlp::from_shapes(net.shapes(), flat);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(2, 4);
  CHECK(copy.forward(x) == net.forward(x));
}

TEST_CASE("summarize uses the sample variance") {
  Eigen::MatrixXd members(3, 2);
  members << 1, 5, 2, 5, 3, 5;
  const auto s = summarize(members);
  CHECK(s.mean(0) == doctest::Approx(2.0));
  CHECK(s.variance(0) == doctest::Approx(1.0));
  CHECK(s.mean(1) == doctest::Approx(5.0));
  CHECK(s.variance(1) == 0.0);
  Eigen::MatrixXd reversed = members.colwise().reverse();
  CHECK(summarize(reversed).variance.isApprox(s.variance));
}

TEST_CASE("fit rejects a pool with fewer than two observations") {
  LabeledPool pool(9, true);
  pool.commit({{3}, {0.2}, 0});
  const auto grid = build_grid(3);
  CHECK_THROWS_AS(fit(pool, grid, EnsembleConfig{}), InvalidStateError);
  pool.commit({{5}, {0.4}, 1});
  EnsembleConfig one;
  one.n_members = 1;
  CHECK_THROWS_AS(fit(pool, grid, one), std::invalid_argument);
}

TEST_CASE("constant targets are fitted on every bag") {
  const auto grid = build_grid(10);
  LabeledPool pool(grid.size(), true);
  IndexList idx;
  for (Index r = 0; r < 10; r += 2) {
    for (Index c = 0; c < 10; c += 3) idx.push_back(r * 10 + c + (r / 2) % 2);
  }
  REQUIRE(idx.size() == 20);
  pool.commit({idx, std::vector<double>(idx.size(), 0.7), 0});
  EnsembleConfig config;
  config.rng_seed = 4;
  config.max_epochs = 3000;
  config.patience = config.max_epochs;
  std::vector<MemberTrace> traces;
  const auto s = predict(fit(pool, grid, config, 0, &traces), grid);
  for (const auto& t : traces) CHECK(t.losses.back() < 1e-6);
  // Off-bag the members keep the shape of their random initialization.
  CHECK(std::isfinite(s.mean.maxCoeff()));
}

TEST_CASE("fits are bitwise reproducible") {
  const auto grid = build_grid(8);
  OracleSpec spec;
  Oracle oracle(spec, grid);
  Rng p(1), o(2);
  const auto pool = init_pool(grid, 20, oracle, p, o);
  EnsembleConfig config;
  config.rng_seed = 99;
  config.max_epochs = 50;
  const auto a = fit(pool, grid, config);
  const auto b = fit(pool, grid, config);
  REQUIRE(a.members.size() == 5);
  for (std::size_t k = 0; k < a.members.size(); ++k) {
    CHECK(a.members[k].flat_parameters() == b.members[k].flat_parameters());
  }
  CHECK(a.members[0].flat_parameters() != a.members[1].flat_parameters());
}

TEST_CASE("members train on complementary 80 percent folds") {
  Eigen::MatrixXd x(2, 10);
  Eigen::VectorXd y(10);
  for (int i = 0; i < 10; ++i) {
    x(0, i) = i;
    x(1, i) = -i;
    y(i) = 0.1 * i;
  }
  EnsembleConfig config;
  config.max_epochs = 5;
  std::vector<MemberTrace> traces;
  fit_rows(x, y, config, 0, &traces);
  REQUIRE(traces.size() == 5);
  for (const auto& t : traces) CHECK(t.bag_size == 8);
}

TEST_CASE("loss is non-increasing between patience resets") {
  const auto grid = build_grid(8);
  OracleSpec spec;
  Oracle oracle(spec, grid);
  Rng p(5), o(6);
  const auto pool = init_pool(grid, 30, oracle, p, o);
  std::vector<MemberTrace> traces;
  EnsembleConfig config;
  config.rng_seed = 1;
  fit(pool, grid, config, 0, &traces);
  for (const auto& t : traces) {
    REQUIRE_FALSE(t.reset_epochs.empty());
    for (std::size_t r = 1; r < t.reset_epochs.size(); ++r) {
      CHECK(t.losses[t.reset_epochs[r]] < t.losses[t.reset_epochs[r - 1]]);
    }
    CHECK(t.losses.size() <= 500);
  }
}

TEST_CASE("noiseless linear data is fitted closely on each bag") {
  Eigen::MatrixXd x(2, 60);
  Eigen::VectorXd y(60);
  Rng rng(8);
  for (int i = 0; i < 60; ++i) {
    x(0, i) = 2 * M_PI * rng.uniform();
    x(1, i) = 2 * M_PI * rng.uniform();
    y(i) = 0.3 * x(0, i) - 0.5;
  }
  EnsembleConfig config;
  config.rng_seed = 3;
  config.max_epochs = 3000;
  config.patience = config.max_epochs;
  std::vector<MemberTrace> traces;
  fit_rows(x, y, config, 0, &traces);
  for (const auto& t : traces) CHECK(t.losses.back() < 1e-3);
}

TEST_CASE("model json round trip predicts identically") {
  const auto grid = build_grid(6);
  OracleSpec spec;
  Oracle oracle(spec, grid);
  Rng p(3), o(4);
  const auto pool = init_pool(grid, 12, oracle, p, o);
  EnsembleConfig config;
  config.max_epochs = 20;
  const auto model = fit(pool, grid, config, 3);
  const auto back = EnsembleModel::from_json(model.to_json());
  CHECK(back.training_round == 3);
  CHECK(predict(back, grid).member_matrix == predict(model, grid).member_matrix);
}

}  // TEST_SUITE
