#ifndef AICAU_QUADRATIC_HPP
#define AICAU_QUADRATIC_HPP

#include <Eigen/Dense>

#include <vector>

#include "aicau/ensemble.hpp"
#include "aicau/nn.hpp"
#include "aicau/rng.hpp"

namespace aicau {

struct QuadraticEstimatorConfig {
  int embedding_dim = 16;
  std::vector<int> hidden_sizes{64, 64, 32};
  double dropout = 0.1;
  bool batch_norm = true;
  double bn_momentum = 0.1;
  double bn_epsilon = 1e-5;
  AdamConfig adam{3e-4, 0.9, 0.999, 1e-8, 1e-5};
  int patience = 200;
  int max_epochs = 2000;
  double validation_fraction = 0.15;
  /// Keep empirical entries where both indices are observed.
  bool overwrite_observed = true;
  std::uint64_t rng_seed = 0;
};

/// Embedding network psi: Linear -> BatchNorm -> ReLU -> Dropout per hidden
/// layer, then a linear map to the embedding. Samples are columns.
class EmbeddingNetwork {
 public:
  EmbeddingNetwork() = default;
  EmbeddingNetwork(int input_dim, const QuadraticEstimatorConfig& config, Rng& rng);

  /// Inference: running batch-norm statistics, no dropout.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;

  /// Training pass: batch statistics, dropout drawn from `rng` (may be null
  /// for no dropout). Caches what backward() needs and updates the running
  /// statistics.
  Eigen::MatrixXd forward_train(const Eigen::MatrixXd& x, Rng* rng);

  /// Gradient of the loss w.r.t. every parameter given d(loss)/d(output) of
  /// the last forward_train call, in parameters() order.
  std::vector<Eigen::MatrixXd> backward(const Eigen::MatrixXd& grad_out) const;

  std::vector<Eigen::MatrixXd*> parameters();

 private:
  struct Hidden {
    DenseLayer dense;
    Eigen::MatrixXd gamma;  // h x 1
    Eigen::MatrixXd beta;   // h x 1
    Eigen::VectorXd running_mean;
    Eigen::VectorXd running_var;
  };
  struct Cache {
    Eigen::MatrixXd input;
    Eigen::MatrixXd normalized;
    Eigen::VectorXd inv_std;
    Eigen::MatrixXd pre_relu;
    Eigen::MatrixXd mask;
  };

  std::vector<Hidden> hidden_;
  DenseLayer output_;
  bool batch_norm_ = true;
  double dropout_ = 0.0;
  double momentum_ = 0.1;
  double epsilon_ = 1e-5;
  std::vector<Cache> cache_;
  Eigen::MatrixXd last_hidden_;
};

/// One observed lower-triangle entry: rows a >= b of the training features.
struct PairTarget {
  Eigen::Index a = 0;
  Eigen::Index b = 0;
  double value = 0.0;
};

/// Symmetric Gram-form regressor Q(x, x*) = s * psi(x)^T psi(x*) trained on
/// observed matrix entries. s > 0 is the RMS of the training targets, so the
/// predicted matrix over any point set stays positive semi-definite.
class QuadraticEstimator {
 public:
  explicit QuadraticEstimator(QuadraticEstimatorConfig config = {});

  /// `features` holds one training point per row.
  void fit(const Eigen::MatrixXd& features, const std::vector<PairTarget>& targets);

  bool fitted() const { return fitted_; }

  /// Embeddings (n x h) scaled by sqrt(s).
  Eigen::MatrixXd embed(const Eigen::MatrixXd& features) const;

  double q(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;

  /// Full predicted matrix over the rows of `features`.
  Eigen::MatrixXd predict_matrix(const Eigen::MatrixXd& features) const;

  const std::vector<double>& train_losses() const { return train_losses_; }
  const std::vector<double>& validation_losses() const { return validation_losses_; }

 private:
  QuadraticEstimatorConfig config_;
  InputScaler scaler_;
  EmbeddingNetwork net_;
  double scale_ = 1.0;
  bool fitted_ = false;
  std::vector<double> train_losses_;
  std::vector<double> validation_losses_;
};

/// Lower-triangle (diagonal included) training entries delta_a * delta_b.
std::vector<PairTarget> rank_one_targets(const Eigen::VectorXd& delta);

}  // namespace aicau

#endif  // AICAU_QUADRATIC_HPP
