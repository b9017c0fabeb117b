#include "aicau/gp.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "aicau/errors.hpp"
#include "aicau/linalg.hpp"

namespace aicau {

GaussianProcess::GaussianProcess(DirectEstimatorConfig config) : config_(config) {}

Eigen::MatrixXd GaussianProcess::kernel(const Eigen::MatrixXd& a,
                                        const Eigen::MatrixXd& b) const {
  Eigen::MatrixXd k(a.rows(), b.rows());
  const Eigen::ArrayXd inv_l = length_scales_.array().inverse();
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      const double r2 = ((a.row(i) - b.row(j)).transpose().array() * inv_l).square().sum();
      k(i, j) = constant_ * std::exp(-0.5 * r2);
    }
  }
  return k;
}

double GaussianProcess::log_marginal_likelihood(const Eigen::VectorXd& log_theta,
                                                Eigen::VectorXd* grad) const {
  const Eigen::Index n = x_.rows();
  const Eigen::Index d = x_.cols();
  const double c = std::exp(log_theta(0));
  Eigen::MatrixXd scaled = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < d; ++j) {
    scaled += sq_dist_[j] * std::exp(-2.0 * log_theta(1 + j));
  }
  const Eigen::MatrixXd kf = c * (-0.5 * scaled.array()).exp().matrix();
  Eigen::MatrixXd k = kf;
  k.diagonal().array() += config_.alpha;

  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) {
    if (grad) grad->setZero(log_theta.size());
    return -std::numeric_limits<double>::infinity();
  }
  const Eigen::VectorXd a = llt.solve(y_std_);
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const double lml = -0.5 * y_std_.dot(a) - 0.5 * log_det -
                     0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
  if (grad) {
    grad->resize(log_theta.size());
    const Eigen::MatrixXd w = a * a.transpose() - llt.solve(Eigen::MatrixXd::Identity(n, n));
    (*grad)(0) = 0.5 * (w.array() * kf.array()).sum();
    for (Eigen::Index j = 0; j < d; ++j) {
      const double inv_l2 = std::exp(-2.0 * log_theta(1 + j));
      (*grad)(1 + j) = 0.5 * inv_l2 * (w.array() * kf.array() * sq_dist_[j].array()).sum();
    }
  }
  return lml;
}

Eigen::VectorXd GaussianProcess::optimize_from(Eigen::VectorXd theta, double& best) const {
  const Eigen::Index p = theta.size();
  Eigen::VectorXd lo(p), hi(p);
  lo(0) = std::log(config_.constant_lower);
  hi(0) = std::log(config_.constant_upper);
  lo.tail(p - 1).setConstant(std::log(config_.length_lower));
  hi.tail(p - 1).setConstant(std::log(config_.length_upper));
  theta = theta.cwiseMax(lo).cwiseMin(hi);

  Eigen::VectorXd grad;
  double f = log_marginal_likelihood(theta, &grad);
  double step = 0.5;
  bool converged = false;
  for (int it = 0; it < config_.max_iterations && !converged && std::isfinite(f); ++it) {
    // projected gradient: drop components pushing against an active bound
    Eigen::VectorXd dir = grad;
    for (Eigen::Index k = 0; k < p; ++k) {
      if ((theta(k) <= lo(k) && dir(k) < 0) || (theta(k) >= hi(k) && dir(k) > 0)) dir(k) = 0;
    }
    const double gmax = dir.cwiseAbs().maxCoeff();
    if (gmax < 1e-7) break;
    bool accepted = false;
    while (step > 1e-8) {
      const Eigen::VectorXd trial = (theta + (step / gmax) * dir).cwiseMax(lo).cwiseMin(hi);
      Eigen::VectorXd trial_grad;
      const double ft = log_marginal_likelihood(trial, &trial_grad);
      if (std::isfinite(ft) && ft >= f + 1e-4 * grad.dot(trial - theta)) {
        const double gain = ft - f;
        theta = trial;
        f = ft;
        grad = trial_grad;
        step = std::min(step * 2.0, 4.0);
        accepted = true;
        converged = gain < 1e-9 * (1.0 + std::abs(f));
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  best = f;
  return theta;
}

void GaussianProcess::fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size()) throw std::invalid_argument("GaussianProcess::fit: size mismatch");
  if (x.rows() < 2) throw InvalidStateError("GaussianProcess::fit: need at least 2 rows");
  if (!y.allFinite()) throw std::invalid_argument("GaussianProcess::fit: non-finite targets");

  x_ = x;
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  y_mean_ = y.mean();
  y_scale_ = std::sqrt((y.array() - y_mean_).square().mean());
  length_scales_ = Eigen::VectorXd::Constant(d, config_.length_init);
  constant_ = config_.constant_init;
  degenerate_ = !(y_scale_ > 1e-12 * (1.0 + std::abs(y_mean_)));
  if (degenerate_) {
    y_scale_ = 1.0;
    weights_.setZero(n);
    return;
  }
  y_std_ = (y.array() - y_mean_) / y_scale_;

  sq_dist_.assign(static_cast<std::size_t>(d), Eigen::MatrixXd(n, n));
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index b = 0; b < n; ++b) {
      for (Eigen::Index a = 0; a < n; ++a) {
        const double diff = x(a, j) - x(b, j);
        sq_dist_[j](a, b) = diff * diff;
      }
    }
  }

  Eigen::VectorXd start(1 + d);
  start(0) = std::log(config_.constant_init);
  start.tail(d).setConstant(std::log(config_.length_init));
  double best = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_theta = optimize_from(start, best);

  Rng rng(config_.rng_seed, "gp-restarts");
  for (int r = 0; r < config_.restarts; ++r) {
    Eigen::VectorXd trial(1 + d);
    const double lc = std::log(config_.constant_lower), hc = std::log(config_.constant_upper);
    const double ll = std::log(config_.length_lower), hl = std::log(config_.length_upper);
    trial(0) = lc + (hc - lc) * rng.uniform();
    for (Eigen::Index j = 0; j < d; ++j) trial(1 + j) = ll + (hl - ll) * rng.uniform();
    double f = 0.0;
    const Eigen::VectorXd theta = optimize_from(trial, f);
    if (f > best) {
      best = f;
      best_theta = theta;
    }
  }

  constant_ = std::exp(best_theta(0));
  length_scales_ = best_theta.tail(d).array().exp();
  Eigen::MatrixXd k = kernel(x_, x_);
  k.diagonal().array() += config_.alpha;
  const auto factor = cholesky(k);
  weights_ = factor.lower.transpose().triangularView<Eigen::Upper>().solve(
      factor.lower.triangularView<Eigen::Lower>().solve(y_std_));
}

Eigen::VectorXd GaussianProcess::predict(const Eigen::MatrixXd& x) const {
  if (degenerate_) return Eigen::VectorXd::Constant(x.rows(), y_mean_);
  const Eigen::VectorXd mean_std = kernel(x, x_) * weights_;
  return (mean_std.array() * y_scale_ + y_mean_).matrix();
}

Eigen::VectorXd direct_fit_predict(const DirectEstimatorConfig& config,
                                   const Eigen::MatrixXd& train_x,
                                   const Eigen::VectorXd& train_y,
                                   const Eigen::MatrixXd& query_x) {
  GaussianProcess gp(config);
  gp.fit(train_x, train_y);
  return gp.predict(query_x);
}

}  // namespace aicau
