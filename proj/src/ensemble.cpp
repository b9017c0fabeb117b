#include "aicau/ensemble.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "aicau/errors.hpp"
#include "aicau/rng.hpp"

namespace aicau {

InputScaler InputScaler::fit(const Eigen::MatrixXd& x) {
  InputScaler s;
  const double n = static_cast<double>(x.cols());
  s.mean = x.rowwise().mean();
  s.scale = ((x.colwise() - s.mean).cwiseAbs2().rowwise().sum() / n).cwiseSqrt();
  for (Eigen::Index r = 0; r < s.scale.size(); ++r) {
    if (!(s.scale(r) > 1e-12)) s.scale(r) = 1.0;
  }
  return s;
}

Eigen::MatrixXd InputScaler::apply(const Eigen::MatrixXd& x) const {
  return (x.colwise() - mean).array().colwise() / scale.array();
}

void pool_training_rows(const LabeledPool& pool, const StateGrid& grid, Eigen::MatrixXd& x,
                        Eigen::VectorXd& y) {
  const Index n = pool.observation_count();
  x.resize(2, n);
  y.resize(n);
  Index row = 0;
  for (Index i = 0; i < pool.grid_size(); ++i) {
    for (const auto& obs : pool.observations(i)) {
      x.col(row) = grid.point(i);
      y(row) = obs.value;
      ++row;
    }
  }
}

namespace {

Mlp train_member(const Eigen::MatrixXd& x, const Eigen::RowVectorXd& y,
                 const EnsembleConfig& config, int member, MemberTrace* trace) {
  Rng init_rng(config.rng_seed, "member-init", static_cast<std::uint64_t>(member));
  Rng batch_rng(config.rng_seed, "member-batch", static_cast<std::uint64_t>(member));
  Mlp net(static_cast<int>(x.rows()), config.hidden_sizes, 1, init_rng);
  auto params = net.parameters();
  Adam adam(config.adam, params);

  const Eigen::Index n = x.cols();
  const Eigen::Index batch =
      config.batch_size <= 0 ? n : std::min<Eigen::Index>(config.batch_size, n);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  std::vector<Eigen::MatrixXd> grads;
  double best = std::numeric_limits<double>::infinity();
  int wait = 0;
  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    double epoch_loss = 0.0;
    if (batch == n) {
      epoch_loss = net.loss_and_gradient(x, y, grads);
      adam.step(params, grads);
    } else {
      for (Eigen::Index a = n - 1; a > 0; --a) {
        std::swap(order[a], order[batch_rng.index(static_cast<std::size_t>(a + 1))]);
      }
      for (Eigen::Index start = 0; start < n; start += batch) {
        const Eigen::Index len = std::min(batch, n - start);
        Eigen::MatrixXd xb(x.rows(), len);
        Eigen::RowVectorXd yb(len);
        for (Eigen::Index c = 0; c < len; ++c) {
          xb.col(c) = x.col(order[start + c]);
          yb(c) = y(order[start + c]);
        }
        epoch_loss += net.loss_and_gradient(xb, yb, grads) * static_cast<double>(len);
        adam.step(params, grads);
      }
      epoch_loss /= static_cast<double>(n);
    }
    if (trace) trace->losses.push_back(epoch_loss);
    if (epoch_loss < best - config.min_delta) {
      best = epoch_loss;
      wait = 0;
      if (trace) trace->reset_epochs.push_back(epoch);
    } else if (++wait >= config.patience) {
      break;
    }
  }
  return net;
}

}  // namespace

EnsembleModel fit_rows(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       const EnsembleConfig& config, int training_round,
                       std::vector<MemberTrace>* traces) {
  if (config.n_members < 2) {
    throw std::invalid_argument("fit: an ensemble needs at least 2 members");
  }
  if (!(config.bag_fraction > 0.0 && config.bag_fraction < 1.0)) {
    throw std::invalid_argument("fit: bag_fraction must lie in (0, 1)");
  }
  const Eigen::Index n = x.cols();
  if (n < 2) throw InvalidStateError("fit: need at least 2 labeled observations");

  EnsembleModel model;
  model.training_round = training_round;
  model.scaler = InputScaler::fit(x);
  const Eigen::MatrixXd xs = model.scaler.apply(x);

  // Shared random partition into folds; member j holds out fold j.
  const int n_folds =
      std::max(2, static_cast<int>(std::lround(1.0 / (1.0 - config.bag_fraction))));
  Rng fold_rng(config.rng_seed, "folds");
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  for (Eigen::Index a = n - 1; a > 0; --a) {
    std::swap(perm[a], perm[fold_rng.index(static_cast<std::size_t>(a + 1))]);
  }
  std::vector<int> fold(static_cast<std::size_t>(n));
  for (Eigen::Index p = 0; p < n; ++p) fold[perm[p]] = static_cast<int>(p % n_folds);

  if (traces) traces->assign(config.n_members, MemberTrace{});
  for (int j = 0; j < config.n_members; ++j) {
    const int held_out = j % n_folds;
    std::vector<Eigen::Index> rows;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (fold[r] != held_out) rows.push_back(r);
    }
    if (rows.empty()) {
      rows.resize(static_cast<std::size_t>(n));
      std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    }
    Eigen::MatrixXd xb(xs.rows(), static_cast<Eigen::Index>(rows.size()));
    Eigen::RowVectorXd yb(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t c = 0; c < rows.size(); ++c) {
      xb.col(static_cast<Eigen::Index>(c)) = xs.col(rows[c]);
      yb(static_cast<Eigen::Index>(c)) = y(rows[c]);
    }
    MemberTrace* trace = traces ? &(*traces)[j] : nullptr;
    if (trace) trace->bag_size = static_cast<int>(rows.size());
    model.members.push_back(train_member(xb, yb, config, j, trace));
  }
  return model;
}

EnsembleModel fit(const LabeledPool& pool, const StateGrid& grid, const EnsembleConfig& config,
                  int training_round, std::vector<MemberTrace>* traces) {
  if (pool.grid_size() != grid.size()) {
    throw std::invalid_argument("fit: pool and grid sizes differ");
  }
  if (pool.observation_count() < 2) {
    throw InvalidStateError("fit: need at least 2 labeled observations");
  }
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  pool_training_rows(pool, grid, x, y);
  return fit_rows(x, y, config, training_round, traces);
}

PredictiveSummary summarize(const Eigen::MatrixXd& member_matrix) {
  const Eigen::Index k = member_matrix.rows();
  if (k < 2) throw std::invalid_argument("summarize: need at least 2 members");
  PredictiveSummary s;
  s.member_matrix = member_matrix;
  s.mean = member_matrix.colwise().mean().transpose();
  const Eigen::MatrixXd centered = member_matrix.rowwise() - s.mean.transpose();
  s.variance = centered.cwiseAbs2().colwise().sum().transpose() / static_cast<double>(k - 1);
  return s;
}

PredictiveSummary predict(const EnsembleModel& model, const StateGrid& grid) {
  const Eigen::MatrixXd xs = model.scaler.apply(grid.points.transpose());
  Eigen::MatrixXd members(static_cast<Eigen::Index>(model.members.size()), grid.size());
  for (std::size_t j = 0; j < model.members.size(); ++j) {
    members.row(static_cast<Eigen::Index>(j)) = model.members[j].forward(xs);
  }
  return summarize(members);
}

nlohmann::json EnsembleModel::to_json() const {
  nlohmann::json out;
  out["training_round"] = training_round;
  out["scaler_mean"] = std::vector<double>(scaler.mean.data(), scaler.mean.data() + scaler.mean.size());
  out["scaler_scale"] =
      std::vector<double>(scaler.scale.data(), scaler.scale.data() + scaler.scale.size());
  out["members"] = nlohmann::json::array();
  for (const auto& m : members) {
    const Eigen::VectorXd flat = m.flat_parameters();
    out["members"].push_back(
        {{"shapes", m.shapes()},
         {"params", std::vector<double>(flat.data(), flat.data() + flat.size())}});
  }
  return out;
}

EnsembleModel EnsembleModel::from_json(const nlohmann::json& j) {
  EnsembleModel model;
  model.training_round = j.at("training_round").get<int>();
  const auto mean = j.at("scaler_mean").get<std::vector<double>>();
  const auto scale = j.at("scaler_scale").get<std::vector<double>>();
  model.scaler.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  model.scaler.scale = Eigen::Map<const Eigen::VectorXd>(scale.data(), static_cast<Eigen::Index>(scale.size()));
  for (const auto& m : j.at("members")) {
    const auto shapes = m.at("shapes").get<std::vector<std::pair<Eigen::Index, Eigen::Index>>>();
    const auto params = m.at("params").get<std::vector<double>>();
    model.members.push_back(Mlp::from_shapes(
        shapes, Eigen::Map<const Eigen::VectorXd>(params.data(), static_cast<Eigen::Index>(params.size()))));
  }
  return model;
}

}  // namespace aicau
