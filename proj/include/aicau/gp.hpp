#ifndef AICAU_GP_HPP
#define AICAU_GP_HPP

#include <Eigen/Dense>

#include <vector>

#include "aicau/rng.hpp"

namespace aicau {

/// Which per-point quantity the direct estimator regresses.
enum class DirectTarget { Bias, Pemse };

struct DirectEstimatorConfig {
  double constant_init = 1.0;
  double constant_lower = 1e-3;
  double constant_upper = 1e3;
  double length_init = 1.0;
  double length_lower = 1e-2;
  double length_upper = 1e2;
  /// White noise added to the kernel diagonal.
  double alpha = 1e-6;
  /// Extra optimizer starts drawn log-uniformly inside the bounds.
  int restarts = 3;
  int max_iterations = 100;
  DirectTarget target = DirectTarget::Bias;
  std::uint64_t rng_seed = 0;
};

/// Exact GP regression with a constant * anisotropic RBF kernel, hyper-
/// parameters fit by bounded gradient ascent on the log marginal likelihood.
/// Targets are standardized internally.
class GaussianProcess {
 public:
  explicit GaussianProcess(DirectEstimatorConfig config = {});

  /// `x` holds one training input per row.
  void fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

  /// Posterior mean in the original target units.
  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;

  /// Log marginal likelihood of the standardized targets at log-space
  /// hyperparameters [log C, log l_1, ..., log l_d]; fills `grad` if given.
  double log_marginal_likelihood(const Eigen::VectorXd& log_theta,
                                 Eigen::VectorXd* grad = nullptr) const;

  double constant() const { return constant_; }
  const Eigen::VectorXd& length_scales() const { return length_scales_; }
  bool degenerate() const { return degenerate_; }
  double target_mean() const { return y_mean_; }
  double target_scale() const { return y_scale_; }

 private:
  Eigen::MatrixXd kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) const;
  Eigen::VectorXd optimize_from(Eigen::VectorXd log_theta, double& best) const;

  DirectEstimatorConfig config_;
  Eigen::MatrixXd x_;
  Eigen::VectorXd y_std_;
  std::vector<Eigen::MatrixXd> sq_dist_;
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  bool degenerate_ = false;
  double constant_ = 1.0;
  Eigen::VectorXd length_scales_;
  Eigen::VectorXd weights_;
};

/// Fit on (train_x, train_y) and return the posterior mean at query_x.
Eigen::VectorXd direct_fit_predict(const DirectEstimatorConfig& config,
                                   const Eigen::MatrixXd& train_x,
                                   const Eigen::VectorXd& train_y,
                                   const Eigen::MatrixXd& query_x);

}  // namespace aicau

#endif  // AICAU_GP_HPP
