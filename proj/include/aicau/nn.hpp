#ifndef AICAU_NN_HPP
#define AICAU_NN_HPP

#include <Eigen/Dense>

#include <vector>

#include "aicau/rng.hpp"

namespace aicau {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// L2 penalty added to the gradient (coupled weight decay).
  double weight_decay = 0.0;
};

/// Adam over a fixed list of parameter tensors.
class Adam {
 public:
  Adam(const AdamConfig& config, const std::vector<Eigen::MatrixXd*>& params);

  void step(const std::vector<Eigen::MatrixXd*>& params,
            const std::vector<Eigen::MatrixXd>& grads);

 private:
  AdamConfig config_;
  std::vector<Eigen::MatrixXd> m_;
  std::vector<Eigen::MatrixXd> v_;
  long t_ = 0;
};

/// Dense layer, weight (out x in) He-uniform, bias (out x 1) uniform in
/// +-1/sqrt(in).
struct DenseLayer {
  Eigen::MatrixXd weight;
  Eigen::MatrixXd bias;

  DenseLayer() = default;
  DenseLayer(int in, int out, Rng& rng);
};

/// Fully connected ReLU network with a linear scalar-or-vector output.
/// Inputs are column-major batches: one sample per column.
class Mlp {
 public:
  Mlp() = default;
  Mlp(int input_dim, const std::vector<int>& hidden, int output_dim, Rng& rng);

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;

  /// Mean squared error against `y` (output_dim x N) and its gradient with
  /// respect to every parameter, in parameters() order.
  double loss_and_gradient(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                           std::vector<Eigen::MatrixXd>& grads) const;

  std::vector<Eigen::MatrixXd*> parameters();
  std::vector<const Eigen::MatrixXd*> parameters() const;

  Eigen::VectorXd flat_parameters() const;
  void set_flat_parameters(const Eigen::VectorXd& flat);
  /// (rows, cols) of every parameter tensor, in parameters() order.
  std::vector<std::pair<Eigen::Index, Eigen::Index>> shapes() const;
  static Mlp from_shapes(const std::vector<std::pair<Eigen::Index, Eigen::Index>>& shapes,
                         const Eigen::VectorXd& flat);

  const std::vector<DenseLayer>& layers() const { return layers_; }

 private:
  std::vector<DenseLayer> layers_;
};

}  // namespace aicau

#endif  // AICAU_NN_HPP
