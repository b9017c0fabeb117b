#include "aicau/quadratic.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "aicau/errors.hpp"

namespace aicau {

EmbeddingNetwork::EmbeddingNetwork(int input_dim, const QuadraticEstimatorConfig& config,
                                   Rng& rng)
    : batch_norm_(config.batch_norm),
      dropout_(config.dropout),
      momentum_(config.bn_momentum),
      epsilon_(config.bn_epsilon) {
  int in = input_dim;
  for (int h : config.hidden_sizes) {
    Hidden layer;
    layer.dense = DenseLayer(in, h, rng);
    layer.gamma = Eigen::MatrixXd::Ones(h, 1);
    layer.beta = Eigen::MatrixXd::Zero(h, 1);
    layer.running_mean = Eigen::VectorXd::Zero(h);
    layer.running_var = Eigen::VectorXd::Ones(h);
    hidden_.push_back(std::move(layer));
    in = h;
  }
  output_ = DenseLayer(in, config.embedding_dim, rng);
}

Eigen::MatrixXd EmbeddingNetwork::forward(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd a = x;
  for (const auto& layer : hidden_) {
    Eigen::MatrixXd z = layer.dense.weight * a;
    z.colwise() += layer.dense.bias.col(0);
    if (batch_norm_) {
      const Eigen::ArrayXd inv_std = (layer.running_var.array() + epsilon_).rsqrt();
      z = ((z.colwise() - layer.running_mean).array().colwise() *
           (inv_std * layer.gamma.col(0).array()))
              .colwise() +
          layer.beta.col(0).array();
    }
    a = z.cwiseMax(0.0);
  }
  Eigen::MatrixXd out = output_.weight * a;
  out.colwise() += output_.bias.col(0);
  return out;
}

Eigen::MatrixXd EmbeddingNetwork::forward_train(const Eigen::MatrixXd& x, Rng* rng) {
  cache_.assign(hidden_.size(), Cache{});
  const double n = static_cast<double>(x.cols());
  Eigen::MatrixXd a = x;
  for (std::size_t l = 0; l < hidden_.size(); ++l) {
    auto& layer = hidden_[l];
    auto& c = cache_[l];
    c.input = a;
    Eigen::MatrixXd z = layer.dense.weight * a;
    z.colwise() += layer.dense.bias.col(0);
    if (batch_norm_) {
      const Eigen::VectorXd mean = z.rowwise().mean();
      const Eigen::MatrixXd centered = z.colwise() - mean;
      const Eigen::VectorXd var = centered.cwiseAbs2().rowwise().sum() / n;
      c.inv_std = (var.array() + epsilon_).rsqrt();
      c.normalized = centered.array().colwise() * c.inv_std.array();
      z = (c.normalized.array().colwise() * layer.gamma.col(0).array()).colwise() +
          layer.beta.col(0).array();
      const double unbias = n > 1.0 ? n / (n - 1.0) : 1.0;
      layer.running_mean = (1.0 - momentum_) * layer.running_mean + momentum_ * mean;
      layer.running_var = (1.0 - momentum_) * layer.running_var + momentum_ * unbias * var;
    }
    c.pre_relu = z;
    Eigen::MatrixXd act = z.cwiseMax(0.0);
    if (rng && dropout_ > 0.0) {
      c.mask.resize(act.rows(), act.cols());
      const double keep = 1.0 - dropout_;
      for (Eigen::Index j = 0; j < act.cols(); ++j) {
        for (Eigen::Index i = 0; i < act.rows(); ++i) {
          c.mask(i, j) = rng->uniform() < keep ? 1.0 / keep : 0.0;
        }
      }
      act = act.cwiseProduct(c.mask);
    } else {
      c.mask.resize(0, 0);
    }
    a = std::move(act);
  }
  last_hidden_ = a;
  Eigen::MatrixXd out = output_.weight * a;
  out.colwise() += output_.bias.col(0);
  return out;
}

std::vector<Eigen::MatrixXd> EmbeddingNetwork::backward(const Eigen::MatrixXd& grad_out) const {
  const double n = static_cast<double>(grad_out.cols());
  // parameters() order: per hidden layer [W, b, gamma, beta], then [W_out, b_out]
  std::vector<Eigen::MatrixXd> grads(4 * hidden_.size() + 2);
  grads[4 * hidden_.size()] = grad_out * last_hidden_.transpose();
  grads[4 * hidden_.size() + 1] = grad_out.rowwise().sum();
  Eigen::MatrixXd delta = output_.weight.transpose() * grad_out;
  for (std::size_t l = hidden_.size(); l-- > 0;) {
    const auto& layer = hidden_[l];
    const auto& c = cache_[l];
    if (c.mask.size() > 0) delta = delta.cwiseProduct(c.mask);
    delta = (c.pre_relu.array() > 0.0).select(delta, 0.0);
    if (batch_norm_) {
      grads[4 * l + 2] = (delta.cwiseProduct(c.normalized)).rowwise().sum();
      grads[4 * l + 3] = delta.rowwise().sum();
      const Eigen::MatrixXd dxhat = delta.array().colwise() * layer.gamma.col(0).array();
      const Eigen::VectorXd sum_dxhat = dxhat.rowwise().sum();
      const Eigen::VectorXd sum_dxhat_xhat = dxhat.cwiseProduct(c.normalized).rowwise().sum();
      delta = ((n * dxhat.array()).colwise() - sum_dxhat.array() -
               c.normalized.array().colwise() * sum_dxhat_xhat.array())
                  .colwise() *
              (c.inv_std.array() / n);
    } else {
      grads[4 * l + 2] = Eigen::MatrixXd::Zero(layer.gamma.rows(), 1);
      grads[4 * l + 3] = Eigen::MatrixXd::Zero(layer.beta.rows(), 1);
    }
    grads[4 * l] = delta * c.input.transpose();
    grads[4 * l + 1] = delta.rowwise().sum();
    if (l > 0) delta = layer.dense.weight.transpose() * delta;
  }
  return grads;
}

std::vector<Eigen::MatrixXd*> EmbeddingNetwork::parameters() {
  std::vector<Eigen::MatrixXd*> out;
  for (auto& layer : hidden_) {
    out.push_back(&layer.dense.weight);
    out.push_back(&layer.dense.bias);
    out.push_back(&layer.gamma);
    out.push_back(&layer.beta);
  }
  out.push_back(&output_.weight);
  out.push_back(&output_.bias);
  return out;
}

QuadraticEstimator::QuadraticEstimator(QuadraticEstimatorConfig config)
    : config_(std::move(config)) {}

namespace {

double pair_loss(const Eigen::MatrixXd& psi, const std::vector<PairTarget>& pairs,
                 const std::vector<std::size_t>& subset, double scale,
                 Eigen::MatrixXd* grad_q) {
  if (subset.empty()) return 0.0;
  double loss = 0.0;
  const double inv = 1.0 / static_cast<double>(subset.size());
  for (std::size_t s : subset) {
    const auto& p = pairs[s];
    const double r = psi.col(p.a).dot(psi.col(p.b)) - p.value / scale;
    loss += r * r;
    if (grad_q) (*grad_q)(p.a, p.b) += 2.0 * r * inv;
  }
  return loss * inv;
}

}  // namespace

void QuadraticEstimator::fit(const Eigen::MatrixXd& features,
                             const std::vector<PairTarget>& targets) {
  const Eigen::Index l = features.rows();
  if (l < 2) throw InvalidStateError("QuadraticEstimator::fit: need at least 2 points");
  if (targets.empty()) throw InvalidStateError("QuadraticEstimator::fit: no targets");
  for (const auto& t : targets) {
    if (t.a < 0 || t.b < 0 || t.a >= l || t.b >= l) {
      throw std::invalid_argument("QuadraticEstimator::fit: pair index out of range");
    }
    if (!std::isfinite(t.value)) {
      throw std::invalid_argument("QuadraticEstimator::fit: non-finite target");
    }
  }

  double ms = 0.0;
  for (const auto& t : targets) ms += t.value * t.value;
  scale_ = std::sqrt(ms / static_cast<double>(targets.size()));
  if (!(scale_ > 0.0)) scale_ = 1.0;

  scaler_ = InputScaler::fit(features.transpose());
  const Eigen::MatrixXd x = scaler_.apply(features.transpose());

  Rng init_rng(config_.rng_seed, "quadratic-init");
  Rng split_rng(config_.rng_seed, "quadratic-split");
  Rng dropout_rng(config_.rng_seed, "quadratic-dropout");
  net_ = EmbeddingNetwork(static_cast<int>(x.rows()), config_, init_rng);

  std::vector<std::size_t> order(targets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t a = order.size() - 1; a > 0; --a) {
    std::swap(order[a], order[split_rng.index(a + 1)]);
  }
  auto n_val = static_cast<std::size_t>(
      std::lround(config_.validation_fraction * static_cast<double>(targets.size())));
  if (n_val >= targets.size()) n_val = 0;
  const std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<long>(n_val));
  const std::vector<std::size_t> train(order.begin() + static_cast<long>(n_val), order.end());

  auto params = net_.parameters();
  Adam adam(config_.adam, params);
  std::vector<Eigen::MatrixXd> best_state;
  double best = std::numeric_limits<double>::infinity();
  int wait = 0;
  train_losses_.clear();
  validation_losses_.clear();

  for (int epoch = 0; epoch < config_.max_epochs; ++epoch) {
    const Eigen::MatrixXd psi = net_.forward_train(x, &dropout_rng);
    Eigen::MatrixXd grad_q = Eigen::MatrixXd::Zero(l, l);
    train_losses_.push_back(pair_loss(psi, targets, train, scale_, &grad_q));
    const Eigen::MatrixXd grad_psi = psi * (grad_q + grad_q.transpose());
    adam.step(params, net_.backward(grad_psi));

    double monitored = train_losses_.back();
    if (!val.empty()) {
      monitored = pair_loss(net_.forward(x), targets, val, scale_, nullptr);
      validation_losses_.push_back(monitored);
    }
    if (monitored < best) {
      best = monitored;
      wait = 0;
      best_state.clear();
      for (const auto* p : params) best_state.push_back(*p);
    } else if (++wait >= config_.patience) {
      break;
    }
  }
  if (!best_state.empty()) {
    for (std::size_t k = 0; k < params.size(); ++k) *params[k] = best_state[k];
  }
  fitted_ = true;
}

Eigen::MatrixXd QuadraticEstimator::embed(const Eigen::MatrixXd& features) const {
  if (!fitted_) throw InvalidStateError("QuadraticEstimator: not fitted");
  return (net_.forward(scaler_.apply(features.transpose())) * std::sqrt(scale_)).transpose();
}

double QuadraticEstimator::q(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  // embed separately so psi(a) does not depend on its position in a batch
  const Eigen::VectorXd pa = embed(a.transpose()).row(0).transpose();
  const Eigen::VectorXd pb = embed(b.transpose()).row(0).transpose();
  double sum = 0.0;
  for (Eigen::Index k = 0; k < pa.size(); ++k) sum += pa(k) * pb(k);
  return sum;
}

Eigen::MatrixXd QuadraticEstimator::predict_matrix(const Eigen::MatrixXd& features) const {
  const Eigen::MatrixXd psi = embed(features);
  Eigen::MatrixXd out = psi * psi.transpose();
  return out.selfadjointView<Eigen::Lower>();
}

std::vector<PairTarget> rank_one_targets(const Eigen::VectorXd& delta) {
  std::vector<PairTarget> out;
  out.reserve(static_cast<std::size_t>(delta.size() * (delta.size() + 1) / 2));
  for (Eigen::Index a = 0; a < delta.size(); ++a) {
    for (Eigen::Index b = 0; b <= a; ++b) out.push_back({a, b, delta(a) * delta(b)});
  }
  return out;
}

}  // namespace aicau
