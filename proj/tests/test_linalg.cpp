#include <doctest.h>

#include <Eigen/Dense>

#include "aicau/errors.hpp"
#include "aicau/linalg.hpp"
#include "aicau/rng.hpp"

using namespace aicau;

namespace {

Eigen::MatrixXd random_symmetric(Rng& rng, int n) {
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
  return (a + a.transpose()) / 2.0;
}

}  // namespace

TEST_SUITE("linalg") {

TEST_CASE("sym_eigen on a diagonal matrix") {
  Eigen::Matrix2d a;
  a << 2, 0, 0, 1;
  const auto eig = sym_eigen(a);
  CHECK(eig.values(0) == doctest::Approx(2.0));
  CHECK(eig.values(1) == doctest::Approx(1.0));
  CHECK(eig.vectors.isApprox(Eigen::Matrix2d::Identity()));
}

TEST_CASE("sym_eigen on the swap matrix") {
  Eigen::Matrix2d a;
  a << 0, 1, 1, 0;
  const auto eig = sym_eigen(a);
  CHECK(eig.values(0) == doctest::Approx(1.0));
  CHECK(eig.values(1) == doctest::Approx(-1.0));
}

TEST_CASE("sym_eigen on a rank-one outer product") {
  const Eigen::Vector3d delta(3, 0, 4);
  const auto eig = sym_eigen(Eigen::Matrix3d(delta * delta.transpose()));
  CHECK(eig.values(0) == doctest::Approx(25.0));
  CHECK(std::abs(eig.values(1)) < 1e-12);
  CHECK(std::abs(eig.values(2)) < 1e-12);
  // Largest component is made positive.
  CHECK(eig.vectors(0, 0) == doctest::Approx(0.6));
  CHECK(std::abs(eig.vectors(1, 0)) < 1e-12);
  CHECK(eig.vectors(2, 0) == doctest::Approx(0.8));
}

TEST_CASE("eigenpairs satisfy residual, orthonormality and reconstruction bounds") {
  Rng rng(7);
  for (int n : {1, 5, 40, 200}) {
    const Eigen::MatrixXd a = random_symmetric(rng, n);
    const auto eig = sym_eigen(a);
    const double scale = a.norm();
    for (int j = 0; j < n; ++j) {
      const double residual = (a * eig.vectors.col(j) - eig.values(j) * eig.vectors.col(j)).norm();
      CHECK(residual <= 1e-8 * (1.0 + std::abs(eig.values(j))) * scale);
      if (j > 0) CHECK(eig.values(j) <= eig.values(j - 1));
    }
    CHECK((eig.vectors.transpose() * eig.vectors - Eigen::MatrixXd::Identity(n, n))
              .cwiseAbs()
              .maxCoeff() < 1e-8);
    const Eigen::MatrixXd rebuilt =
        eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose();
    CHECK((rebuilt - a).norm() <= 1e-7 * scale);
    CHECK(std::abs(a.trace() - eig.values.sum()) <= 1e-8 * n);
  }
}

TEST_CASE("sign convention is invariant to input sign flips of eigenvectors") {
  Rng rng(11);
  const Eigen::MatrixXd a = random_symmetric(rng, 12);
  const auto e1 = sym_eigen(a);
  const auto e2 = sym_eigen(Eigen::MatrixXd(a));
  CHECK(e1.vectors == e2.vectors);
  for (Eigen::Index j = 0; j < e1.vectors.cols(); ++j) {
    Eigen::Index arg = 0;
    e1.vectors.col(j).cwiseAbs().maxCoeff(&arg);
    CHECK(e1.vectors(arg, j) > 0.0);
  }
}

TEST_CASE("templated on the scalar type") {
  Eigen::Matrix2f a;
  a << 3.0f, 1.0f, 1.0f, 3.0f;
  const auto eig = sym_eigen(a);
  static_assert(std::is_same_v<decltype(eig.values)::Scalar, float>);
  CHECK(eig.values(0) == doctest::Approx(4.0f));
  CHECK(eig.values(1) == doctest::Approx(2.0f));
}

TEST_CASE("symmetrize averages with the transpose") {
  Eigen::Matrix2d a;
  a << 1, 2, 4, 3;
  const Eigen::MatrixXd s = symmetrize(a);
  CHECK(s(0, 1) == 3.0);
  CHECK(s(1, 0) == 3.0);
  CHECK(is_symmetric(s));
  CHECK_FALSE(is_symmetric(a));
}

TEST_CASE("cholesky of the identity is the identity") {
  const auto f = cholesky(Eigen::Matrix3d::Identity());
  CHECK(f.lower.isApprox(Eigen::Matrix3d::Identity()));
  CHECK(f.jitter == 0.0);
}

TEST_CASE("cholesky hand factorization") {
  Eigen::Matrix2d a;
  a << 4, 2, 2, 5;
  const auto f = cholesky(a);
  Eigen::Matrix2d expected;
  expected << 2, 0, 1, 2;
  CHECK(f.lower.isApprox(expected));
  CHECK((f.lower * f.lower.transpose()).isApprox(a));
}

TEST_CASE("cholesky of a rank-deficient matrix succeeds with jitter") {
  Eigen::Matrix2d a;
  a << 1, 1, 1, 1;
  const auto f = cholesky(a);
  CHECK(f.jitter > 0.0);
  CHECK(f.jitter <= 1e-6);
  CHECK((f.lower * f.lower.transpose() - a).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("cholesky fails on an indefinite matrix") {
  Eigen::Matrix2d a;
  a << 1, 0, 0, -1;
  CHECK_THROWS_AS(cholesky(a), NumericalError);
}

TEST_CASE("psd_project") {
  SUBCASE("clips negative eigenvalues") {
    Eigen::Matrix2d a;
    a << 1, 0, 0, -2;
    const Eigen::MatrixXd p = psd_project(a);
    CHECK((p - Eigen::Matrix2d(Eigen::Vector2d(1, 0).asDiagonal())).cwiseAbs().maxCoeff() <
          1e-12);
  }
  SUBCASE("leaves PSD input unchanged and is idempotent") {
    Rng rng(3);
    Eigen::MatrixXd b(6, 3);
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = rng.normal();
    const Eigen::MatrixXd a = b * b.transpose();
    CHECK((psd_project(a) - a).cwiseAbs().maxCoeff() < 1e-8);
  }
  SUBCASE("trace equals the sum of positive eigenvalues") {
    Rng rng(5);
    const Eigen::MatrixXd a = random_symmetric(rng, 10);
    const auto eig = sym_eigen(a);
    const Eigen::MatrixXd p = psd_project(a);
    CHECK(p.trace() == doctest::Approx(eig.values.cwiseMax(0.0).sum()));
    CHECK((psd_project(p) - p).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(sym_eigen(p).values.minCoeff() > -1e-10);
  }
}

TEST_CASE("numerical_rank counts eigenvalues above the relative threshold") {
  Eigen::VectorXd v(4);
  v << 10, 1e-3, 1e-9, -1e-12;
  CHECK(numerical_rank(v) == 2);
  CHECK(numerical_rank(Eigen::VectorXd(Eigen::VectorXd::Zero(3))) == 0);
}

}  // TEST_SUITE
