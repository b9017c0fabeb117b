#include <doctest.h>

#include <cmath>
#include <numbers>

#include "aicau/cobias.hpp"
#include "aicau/errors.hpp"

using namespace aicau;
using std::numbers::pi;

namespace {

PredictiveSummary single_member(std::initializer_list<double> f) {
  PredictiveSummary s;
  s.member_matrix = Eigen::RowVectorXd::Map(std::data(f), static_cast<Eigen::Index>(f.size()));
  s.mean = s.member_matrix.row(0).transpose();
  s.variance = Eigen::VectorXd::Zero(s.mean.size());
  return s;
}

// Two indices, realized together in two rounds: (0, 1) and (2, 3).
LabeledPool paired_pool() {
  LabeledPool pool(2, true);
  pool.commit({{0, 1}, {0.0, 1.0}, 0});
  pool.commit({{0, 1}, {2.0, 3.0}, 0});
  return pool;
}

}  // namespace

TEST_SUITE("cobias") {

TEST_CASE("tau is assembled from its components") {
  Eigen::VectorXd e(3), b(3), y(3);
  e << 0.1, 0.2, 0.0;
  b << 0.04, 0.0, 1.0;
  y << 9.0, 0.01, 0.0;
  const auto t = TauVector::from_components(e, b, y);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(t.tau(i) - (e(i) + b(i) + y(i))) < 1e-10);
    CHECK(std::abs(t.reducible(i) - (e(i) + b(i))) < 1e-10);
  }
  CHECK_THROWS_AS(TauVector::from_components(e, b, Eigen::VectorXd(2)), std::invalid_argument);
}

TEST_CASE("empirical_bias") {
  PredictiveSummary s;
  s.member_matrix = Eigen::MatrixXd(3, 2);
  s.member_matrix << 1, 0.4, 2, 0.4, 3, 0.4;
  s.mean = s.member_matrix.colwise().mean().transpose();
  LabeledPool pool(3, true);
  pool.commit({{0, 0, 1}, {0.0, 0.0, 0.4}, 0});
  CHECK(*empirical_bias(s, pool, 0) == doctest::Approx(2.0));
  CHECK(*empirical_bias(s, pool, 1) == doctest::Approx(0.0));
  s.member_matrix.conservativeResize(3, 3);
  s.member_matrix.col(2).setZero();
  CHECK_FALSE(empirical_bias(s, pool, 2).has_value());
}

TEST_CASE("uncorrelated omega hand examples") {
  const auto s = single_member({1.0, 2.0});
  const auto pool = paired_pool();
  CHECK(*empirical_omega_uncorrelated(s, pool, 0, 1) == doctest::Approx(0.0));
  CHECK(*empirical_omega_uncorrelated(s, pool, 0, 0) == doctest::Approx(1.0));
  LabeledPool exact(2, true);
  exact.commit({{0, 1}, {1.0, 2.0}, 0});
  CHECK(*empirical_omega_uncorrelated(s, exact, 0, 1) == 0.0);
  LabeledPool partial(2, true);
  partial.commit({{0}, {1.0}, 0});
  CHECK_FALSE(empirical_omega_uncorrelated(s, partial, 0, 1).has_value());
}

TEST_CASE("correlated omega recovers co-realized structure") {
  const auto s = single_member({1.0, 2.0});
  const auto pool = paired_pool();
  CHECK(*empirical_omega_correlated(s, pool, 0, 1) == doctest::Approx(1.0));
  CHECK(*empirical_omega_correlated(s, pool, 1, 0) == doctest::Approx(1.0));
  // Diagonal agrees with the uncorrelated form.
  for (Index i : {0, 1}) {
    CHECK(*empirical_omega_correlated(s, pool, i, i) ==
          doctest::Approx(*empirical_omega_uncorrelated(s, pool, i, i)));
  }
  LabeledPool apart(2, true);
  apart.commit({{0}, {0.0}, 0});
  apart.commit({{1}, {1.0}, 0});
  CHECK_FALSE(empirical_omega_correlated(s, apart, 0, 1).has_value());
}

TEST_CASE("assemble_omega") {
  const SymMatrix sf = 0.1 * Eigen::Matrix2d::Identity();
  const Eigen::Vector2d d(1, -1);
  SymMatrix sy(2, 2);
  sy << 0.04, 0.02, 0.02, 0.04;
  const auto o = assemble_omega(sf, direct_delta_to_matrix(d), sy);
  SymMatrix expected(2, 2);
  expected << 1.14, -0.98, -0.98, 1.14;
  CHECK((o.omega - expected).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(o.omega.trace() == doctest::Approx(sf.trace() + d.squaredNorm() + sy.trace()));
  const auto zero = assemble_omega(SymMatrix::Zero(3, 3), SymMatrix::Zero(3, 3),
                                   SymMatrix::Zero(3, 3));
  CHECK(zero.omega.isZero());
  CHECK_THROWS_AS(assemble_omega(sf, SymMatrix::Zero(3, 3), sy), std::invalid_argument);
}

TEST_CASE("sigma_F from members") {
  Eigen::MatrixXd m(2, 2);
  m << 0, 0, 2, -2;
  CHECK(sigma_F_from_members(m)(0, 1) == doctest::Approx(-2.0));
  CHECK(sigma_F_from_members(Eigen::MatrixXd::Ones(4, 6)).isZero());
  CHECK_THROWS_AS(sigma_F_from_members(Eigen::MatrixXd::Ones(1, 3)), std::invalid_argument);

  Rng rng(4);
  Eigen::MatrixXd members(5, 60);
  for (Eigen::Index i = 0; i < members.size(); ++i) members.data()[i] = rng.normal();
  const SymMatrix cov = sigma_F_from_members(members);
  CHECK((cov.diagonal() - summarize(members).variance).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(numerical_rank(sym_eigen(cov).values) <= 4);
}

TEST_CASE("sigma_Y for the three problem types") {
  const auto grid = build_grid(5);  // spacing pi/2, index 0 = (0,0), index 1 = (0, pi/2)
  OracleSpec spec;
  spec.problem_type = ProblemType::TypeI;
  CHECK(sigma_Y_known(spec, grid).isZero());
  spec.problem_type = ProblemType::TypeII;
  const SymMatrix s2 = sigma_Y_known(spec, grid);
  CHECK(s2(0, 0) == doctest::Approx(0.01));
  CHECK(s2(0, 1) == 0.0);
  spec.problem_type = ProblemType::TypeIII;
  const SymMatrix s3 = sigma_Y_known(spec, grid);
  CHECK(s3(0, 1) == doctest::Approx(0.01 * std::exp(-1.0)));
  CHECK(is_symmetric(s3));
}

TEST_CASE("direct_delta_to_matrix") {
  const SymMatrix d = direct_delta_to_matrix(Eigen::Vector3d(3, 0, 4));
  CHECK(d.trace() == doctest::Approx(25.0));
  CHECK(numerical_rank(sym_eigen(d).values) == 1);
  Rng rng(2);
  Eigen::VectorXd v(8);
  for (int i = 0; i < 8; ++i) v(i) = rng.normal();
  const SymMatrix m = direct_delta_to_matrix(v);
  const double scale = m.cwiseAbs().maxCoeff();
  for (int a = 0; a < 8; ++a) {
    for (int b = 0; b < 8; ++b) {
      CHECK(std::abs(m(a, a) * m(b, b) - m(a, b) * m(b, a)) < 1e-8 * scale);
    }
  }
  CHECK(direct_delta_to_matrix(Eigen::VectorXd::Zero(4)).isZero());
}

TEST_CASE("cheat estimate on a TypeI exact fit") {
  const auto grid = build_grid(6);
  OracleSpec spec;
  spec.problem_type = ProblemType::TypeI;
  Oracle oracle(spec, grid);
  Eigen::MatrixXd members(3, grid.size());
  for (int k = 0; k < 3; ++k) members.row(k) = oracle.mean_field().transpose();
  members.row(0).array() += 0.1;
  members.row(1).array() -= 0.1;
  const auto summary = summarize(members);
  Rng rng(1);
  const auto est = cheat_estimate(summary, oracle, rng, 10, true);
  CHECK(est.delta.cwiseAbs().maxCoeff() < 1e-12);
  CHECK((est.tau.tau - summary.variance).cwiseAbs().maxCoeff() < 1e-12);
  REQUIRE(est.omega.has_value());
  CHECK(est.omega->sigma_Y.isZero());
}

TEST_CASE("cheat estimate on TypeII") {
  const auto grid = build_grid(3);  // index 4 is (pi, pi), where the noise vanishes
  OracleSpec spec;
  Oracle oracle(spec, grid);
  Eigen::MatrixXd members = Eigen::MatrixXd::Constant(2, grid.size(), 0.3);
  members(0, 4) = 0.5;
  const auto summary = summarize(members);
  Rng rng(5);
  const auto est = cheat_estimate(summary, oracle, rng);
  CHECK(est.delta(4) == doctest::Approx(summary.mean(4) - 1.0));
  CHECK((est.tau.reducible - (est.tau.tau - oracle.std_field().cwiseAbs2()))
            .cwiseAbs()
            .maxCoeff() < 1e-12);
}

TEST_CASE("direct estimate keeps observed biases and fills the rest") {
  const auto grid = build_grid(6);
  OracleSpec spec;
  spec.problem_type = ProblemType::TypeI;
  Oracle oracle(spec, grid);
  Rng p(1), o(2);
  const auto pool = init_pool(grid, 12, oracle, p, o);
  Eigen::MatrixXd members(2, grid.size());
  members.row(0) = 0.2 * grid.points.col(0).transpose();
  members.row(1) = members.row(0).array() + 0.05;
  const auto summary = summarize(members);
  DirectEstimatorConfig config;
  const auto est = direct_estimate(summary, pool, grid, config, true);
  for (Index i : pool.labeled_indices()) {
    CHECK(est.delta(i) == *empirical_bias(summary, pool, i));
  }
  REQUIRE(est.omega.has_value());
  CHECK(est.omega->sigma_Y.isZero());
  CHECK(numerical_rank(sym_eigen(est.omega->delta_mat).values) == 1);
  CHECK(est.delta.allFinite());
}

TEST_CASE("delta_from_matrix recovers a signed rank-one field") {
  Eigen::VectorXd d(5);
  d << 0.5, -1.0, 0.2, 0.0, -0.3;
  ObservedBias obs{{0, 1}, Eigen::Vector2d(0.5, -1.0)};
  const Eigen::VectorXd back = delta_from_matrix(direct_delta_to_matrix(d), obs);
  CHECK((back - d).cwiseAbs().maxCoeff() < 1e-10);
  ObservedBias flipped{{0, 1}, Eigen::Vector2d(-0.5, 1.0)};
  CHECK((delta_from_matrix(direct_delta_to_matrix(d), flipped) + d).cwiseAbs().maxCoeff() <
        1e-10);
}

TEST_CASE("quadratic estimate keeps observed entries") {
  const auto grid = build_grid(6);
  OracleSpec spec;
  Oracle oracle(spec, grid);
  Rng p(1), o(2);
  const auto pool = init_pool(grid, 8, oracle, p, o);
  Eigen::MatrixXd members(2, grid.size());
  members.row(0) = 0.1 * grid.points.col(1).transpose();
  members.row(1) = members.row(0).array() - 0.02;
  const auto summary = summarize(members);
  QuadraticEstimatorConfig config;
  config.max_epochs = 100;
  const auto observed = observed_bias(summary, pool);
  const auto est = quadratic_estimate(summary, pool, grid, config, true);
  REQUIRE(est.omega.has_value());
  const auto& dm = est.omega->delta_mat;
  for (std::size_t a = 0; a < observed.indices.size(); ++a) {
    for (std::size_t b = 0; b < observed.indices.size(); ++b) {
      CHECK(dm(observed.indices[a], observed.indices[b]) ==
            observed.delta(static_cast<Eigen::Index>(a)) *
                observed.delta(static_cast<Eigen::Index>(b)));
    }
  }
  CHECK((dm - dm.transpose()).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(psd_project(dm).diagonal().minCoeff() >= -1e-6);
  const auto diag_only = quadratic_estimate(summary, pool, grid, config, false);
  CHECK((diag_only.tau.bias_sq - dm.diagonal()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("estimator names") {
  CHECK(parse_estimator("quadratic") == EstimatorKind::Quadratic);
  CHECK(to_string(EstimatorKind::Direct) == "direct");
  CHECK_THROWS_AS(parse_estimator("oracle"), std::invalid_argument);
}

}  // TEST_SUITE
