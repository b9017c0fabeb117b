#ifndef AICAU_LINALG_HPP
#define AICAU_LINALG_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "aicau/errors.hpp"

namespace aicau {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Symmetric matrices are stored densely; every routine here symmetrizes its
/// input as (A + A^T) / 2 on ingest.
using SymMatrix = Eigen::MatrixXd;

template <typename Derived>
MatrixX<typename Derived::Scalar> symmetrize(const Eigen::MatrixBase<Derived>& a) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("symmetrize: matrix is not square");
  }
  return (a + a.transpose()) / typename Derived::Scalar(2);
}

template <typename Derived>
bool is_symmetric(const Eigen::MatrixBase<Derived>& a,
                  typename Derived::Scalar tol = 1e-10) {
  if (a.rows() != a.cols()) return false;
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= tol;
}

/// Eigenpairs with eigenvalues sorted in descending order. Column j of
/// `vectors` belongs to `values(j)`.
template <typename Scalar>
struct EigenPairs {
  VectorX<Scalar> values;
  MatrixX<Scalar> vectors;
};

/// Flip each column so that its largest-magnitude component is positive
/// (first such index on ties).
template <typename Scalar>
void canonicalize_signs(MatrixX<Scalar>& vectors) {
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    Eigen::Index best = 0;
    Scalar best_abs = Scalar(-1);
    for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
      const Scalar v = std::abs(vectors(i, j));
      if (v > best_abs) {
        best_abs = v;
        best = i;
      }
    }
    if (vectors(best, j) < Scalar(0)) vectors.col(j) = -vectors.col(j);
  }
}

/// Full symmetric eigendecomposition, descending spectrum.
template <typename Derived>
EigenPairs<typename Derived::Scalar> sym_eigen(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  const MatrixX<Scalar> s = symmetrize(a);
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> solver(s, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "sym_eigen: no convergence for " << s.rows() << "x" << s.cols()
        << " matrix (max |a_ij| = " << s.cwiseAbs().maxCoeff() << ")";
    throw NumericalError(msg.str());
  }
  EigenPairs<Scalar> out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  canonicalize_signs(out.vectors);
  return out;
}

/// Diagonal jitter ladder: zero first, then `initial`, doubling up to `max`.
struct JitterPolicy {
  double initial = 1e-10;
  double max = 1e-6;
};

template <typename Scalar>
struct CholeskyFactor {
  MatrixX<Scalar> lower;
  Scalar jitter = Scalar(0);
};

template <typename Derived>
CholeskyFactor<typename Derived::Scalar> cholesky(const Eigen::MatrixBase<Derived>& a,
                                                  const JitterPolicy& policy = {}) {
  using Scalar = typename Derived::Scalar;
  const MatrixX<Scalar> s = symmetrize(a);
  const auto identity = MatrixX<Scalar>::Identity(s.rows(), s.cols());
  Scalar jitter = Scalar(0);
  while (true) {
    Eigen::LLT<MatrixX<Scalar>> llt(s + jitter * identity);
    if (llt.info() == Eigen::Success) {
      return {llt.matrixL(), jitter};
    }
    jitter = jitter == Scalar(0) ? Scalar(policy.initial) : jitter * Scalar(2);
    if (jitter > Scalar(policy.max) * Scalar(1 + 1e-12)) {
      std::ostringstream msg;
      msg << "cholesky: matrix not positive definite with jitter up to " << policy.max;
      throw NumericalError(msg.str());
    }
  }
}

/// Nearest PSD matrix in Frobenius norm: clip negative eigenvalues to zero.
template <typename Derived>
MatrixX<typename Derived::Scalar> psd_project(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  const auto eig = sym_eigen(a);
  const VectorX<Scalar> clipped = eig.values.cwiseMax(Scalar(0));
  MatrixX<Scalar> out = eig.vectors * clipped.asDiagonal() * eig.vectors.transpose();
  return symmetrize(out);
}

/// Number of eigenvalues above `rel_tol` times the largest magnitude.
template <typename Scalar>
Eigen::Index numerical_rank(const VectorX<Scalar>& eigenvalues, Scalar rel_tol = 1e-8) {
  if (eigenvalues.size() == 0) return 0;
  const Scalar scale = eigenvalues.cwiseAbs().maxCoeff();
  if (scale == Scalar(0)) return 0;
  return (eigenvalues.array() > rel_tol * scale).count();
}

}  // namespace aicau

#endif  // AICAU_LINALG_HPP
