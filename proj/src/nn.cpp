#include "aicau/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace aicau {

Adam::Adam(const AdamConfig& config, const std::vector<Eigen::MatrixXd*>& params)
    : config_(config) {
  for (const auto* p : params) {
    m_.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
    v_.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
  }
}

void Adam::step(const std::vector<Eigen::MatrixXd*>& params,
                const std::vector<Eigen::MatrixXd>& grads) {
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  const double step = config_.learning_rate * std::sqrt(c2) / c1;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Eigen::MatrixXd g = grads[k];
    if (config_.weight_decay != 0.0) g += config_.weight_decay * *params[k];
    m_[k] = config_.beta1 * m_[k] + (1.0 - config_.beta1) * g;
    v_[k] = config_.beta2 * v_[k] + (1.0 - config_.beta2) * g.cwiseAbs2();
    params[k]->array() -=
        step * m_[k].array() / (v_[k].array().sqrt() + config_.epsilon * std::sqrt(c2));
  }
}

DenseLayer::DenseLayer(int in, int out, Rng& rng)
    : weight(out, in), bias(out, 1) {
  const double limit = std::sqrt(6.0 / in);
  for (Eigen::Index c = 0; c < weight.cols(); ++c) {
    for (Eigen::Index r = 0; r < weight.rows(); ++r) {
      weight(r, c) = (2.0 * rng.uniform() - 1.0) * limit;
    }
  }
  const double bias_limit = 1.0 / std::sqrt(static_cast<double>(in));
  for (Eigen::Index r = 0; r < bias.rows(); ++r) {
    bias(r, 0) = (2.0 * rng.uniform() - 1.0) * bias_limit;
  }
}

Mlp::Mlp(int input_dim, const std::vector<int>& hidden, int output_dim, Rng& rng) {
  int in = input_dim;
  for (int h : hidden) {
    layers_.emplace_back(in, h, rng);
    in = h;
  }
  layers_.emplace_back(in, output_dim, rng);
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd a = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Eigen::MatrixXd z = layers_[l].weight * a;
    z.colwise() += layers_[l].bias.col(0);
    if (l + 1 < layers_.size()) z = z.cwiseMax(0.0);
    a = std::move(z);
  }
  return a;
}

double Mlp::loss_and_gradient(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                              std::vector<Eigen::MatrixXd>& grads) const {
  const std::size_t depth = layers_.size();
  std::vector<Eigen::MatrixXd> acts;  // acts[l] is the input to layer l
  acts.reserve(depth + 1);
  acts.push_back(x);
  for (std::size_t l = 0; l < depth; ++l) {
    Eigen::MatrixXd z = layers_[l].weight * acts.back();
    z.colwise() += layers_[l].bias.col(0);
    if (l + 1 < depth) z = z.cwiseMax(0.0);
    acts.push_back(std::move(z));
  }
  const double n = static_cast<double>(x.cols());
  const Eigen::MatrixXd diff = acts.back() - y;
  const double loss = diff.squaredNorm() / n;

  grads.resize(2 * depth);
  Eigen::MatrixXd delta = (2.0 / n) * diff;
  for (std::size_t l = depth; l-- > 0;) {
    grads[2 * l] = delta * acts[l].transpose();
    grads[2 * l + 1] = delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd back = layers_[l].weight.transpose() * delta;
      delta = (acts[l].array() > 0.0).select(back, 0.0);
    }
  }
  return loss;
}

std::vector<Eigen::MatrixXd*> Mlp::parameters() {
  std::vector<Eigen::MatrixXd*> out;
  for (auto& layer : layers_) {
    out.push_back(&layer.weight);
    out.push_back(&layer.bias);
  }
  return out;
}

std::vector<const Eigen::MatrixXd*> Mlp::parameters() const {
  std::vector<const Eigen::MatrixXd*> out;
  for (const auto& layer : layers_) {
    out.push_back(&layer.weight);
    out.push_back(&layer.bias);
  }
  return out;
}

Eigen::VectorXd Mlp::flat_parameters() const {
  Eigen::Index total = 0;
  for (const auto* p : parameters()) total += p->size();
  Eigen::VectorXd flat(total);
  Eigen::Index offset = 0;
  for (const auto* p : parameters()) {
    flat.segment(offset, p->size()) = p->reshaped();
    offset += p->size();
  }
  return flat;
}

void Mlp::set_flat_parameters(const Eigen::VectorXd& flat) {
  Eigen::Index offset = 0;
  for (auto* p : parameters()) {
    if (offset + p->size() > flat.size()) {
      throw std::invalid_argument("Mlp::set_flat_parameters: vector too short");
    }
    p->reshaped() = flat.segment(offset, p->size());
    offset += p->size();
  }
  if (offset != flat.size()) {
    throw std::invalid_argument("Mlp::set_flat_parameters: vector too long");
  }
}

std::vector<std::pair<Eigen::Index, Eigen::Index>> Mlp::shapes() const {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
  for (const auto* p : parameters()) out.emplace_back(p->rows(), p->cols());
  return out;
}

Mlp Mlp::from_shapes(const std::vector<std::pair<Eigen::Index, Eigen::Index>>& shapes,
                     const Eigen::VectorXd& flat) {
  if (shapes.empty() || shapes.size() % 2 != 0) {
    throw std::invalid_argument("Mlp::from_shapes: expected weight/bias pairs");
  }
  Mlp mlp;
  for (std::size_t k = 0; k < shapes.size(); k += 2) {
    DenseLayer layer;
    layer.weight.resize(shapes[k].first, shapes[k].second);
    layer.bias.resize(shapes[k + 1].first, shapes[k + 1].second);
    if (layer.bias.rows() != layer.weight.rows() || layer.bias.cols() != 1) {
      throw std::invalid_argument("Mlp::from_shapes: bias shape mismatch");
    }
    mlp.layers_.push_back(std::move(layer));
  }
  mlp.set_flat_parameters(flat);
  return mlp;
}

}  // namespace aicau
