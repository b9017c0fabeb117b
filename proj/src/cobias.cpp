#include "aicau/cobias.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "aicau/errors.hpp"

namespace aicau {

TauVector TauVector::from_components(const Eigen::VectorXd& epistemic,
                                     const Eigen::VectorXd& bias_sq,
                                     const Eigen::VectorXd& aleatoric) {
  if (epistemic.size() != bias_sq.size() || epistemic.size() != aleatoric.size()) {
    throw std::invalid_argument("TauVector: component sizes differ");
  }
  TauVector t;
  t.epistemic = epistemic;
  t.bias_sq = bias_sq;
  t.aleatoric = aleatoric;
  t.reducible = epistemic + bias_sq;
  t.tau = t.reducible + aleatoric;
  return t;
}

namespace {

double mean_observation(const std::vector<Observation>& obs) {
  double s = 0.0;
  for (const auto& o : obs) s += o.value;
  return s / static_cast<double>(obs.size());
}

}  // namespace

std::optional<double> empirical_bias(const PredictiveSummary& summary, const LabeledPool& pool,
                                     Index i) {
  const auto& obs = pool.observations(i);
  if (obs.empty()) return std::nullopt;
  return summary.member_matrix.col(i).mean() - mean_observation(obs);
}

std::optional<double> empirical_omega_uncorrelated(const PredictiveSummary& summary,
                                                   const LabeledPool& pool, Index i, Index j) {
  const auto& oi = pool.observations(i);
  const auto& oj = pool.observations(j);
  if (oi.empty() || oj.empty()) return std::nullopt;
  const Eigen::MatrixXd& f = summary.member_matrix;
  const double k = static_cast<double>(f.rows());
  if (i == j) {
    double sum = 0.0;
    for (Eigen::Index m = 0; m < f.rows(); ++m) {
      for (const auto& o : oi) sum += (f(m, i) - o.value) * (f(m, i) - o.value);
    }
    return sum / (k * static_cast<double>(oi.size()));
  }
  // the triple sum factorizes over r and s
  const double yi = mean_observation(oi);
  const double yj = mean_observation(oj);
  double sum = 0.0;
  for (Eigen::Index m = 0; m < f.rows(); ++m) sum += (f(m, i) - yi) * (f(m, j) - yj);
  return sum / k;
}

std::optional<double> empirical_omega_correlated(const PredictiveSummary& summary,
                                                 const LabeledPool& pool, Index i, Index j) {
  const auto& oi = pool.observations(i);
  const auto& oj = pool.observations(j);
  const Eigen::MatrixXd& f = summary.member_matrix;
  double sum = 0.0;
  long pairs = 0;
  auto accumulate = [&](double yi, double yj) {
    for (Eigen::Index m = 0; m < f.rows(); ++m) sum += (f(m, i) - yi) * (f(m, j) - yj);
    ++pairs;
  };
  if (i == j) {
    for (const auto& o : oi) accumulate(o.value, o.value);
  } else {
    for (const auto& a : oi) {
      for (const auto& b : oj) {
        if (a.round_tag == b.round_tag) accumulate(a.value, b.value);
      }
    }
  }
  if (pairs == 0) return std::nullopt;
  return sum / (static_cast<double>(f.rows()) * static_cast<double>(pairs));
}

OmegaDecomposition assemble_omega(const SymMatrix& sigma_F, const SymMatrix& delta_mat,
                                  const SymMatrix& sigma_Y, int round) {
  const Eigen::Index n = sigma_F.rows();
  for (const SymMatrix* m : {&sigma_F, &delta_mat, &sigma_Y}) {
    if (m->rows() != n || m->cols() != n) {
      throw std::invalid_argument("assemble_omega: component dimensions differ");
    }
  }
  OmegaDecomposition out;
  out.sigma_F = sigma_F;
  out.delta_mat = delta_mat;
  out.sigma_Y = sigma_Y;
  out.omega = sigma_F + delta_mat + sigma_Y;
  out.delta_vec = delta_mat.diagonal().cwiseMax(0.0).cwiseSqrt();
  out.round = round;
  return out;
}

SymMatrix sigma_F_from_members(const Eigen::MatrixXd& member_matrix) {
  const Eigen::Index k = member_matrix.rows();
  if (k < 2) throw std::invalid_argument("sigma_F_from_members: need at least 2 members");
  const Eigen::MatrixXd centered =
      member_matrix.rowwise() - member_matrix.colwise().mean();
  SymMatrix out = SymMatrix::Zero(member_matrix.cols(), member_matrix.cols());
  out.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(),
                                                 1.0 / static_cast<double>(k - 1));
  return out.selfadjointView<Eigen::Lower>();
}

SymMatrix sigma_Y_known(const OracleSpec& spec, const StateGrid& grid) {
  const Index n = grid.size();
  SymMatrix out = SymMatrix::Zero(n, n);
  if (spec.problem_type == ProblemType::TypeI) return out;
  Eigen::VectorXd sd(n);
  for (Index i = 0; i < n; ++i) sd(i) = noise_std(spec, grid.point(i));
  if (spec.problem_type == ProblemType::TypeII) {
    out.diagonal() = sd.cwiseAbs2();
    return out;
  }
  for (Index i = 0; i < n; ++i) {
    out(i, i) = sd(i) * sd(i);
    for (Index j = 0; j < i; ++j) {
      out(i, j) = out(j, i) =
          sd(i) * sd(j) * noise_correlation(spec, grid.point(i), grid.point(j));
    }
  }
  return out;
}

SymMatrix direct_delta_to_matrix(const Eigen::VectorXd& delta) {
  return delta * delta.transpose();
}

std::string_view to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::Cheat:
      return "cheat";
    case EstimatorKind::Direct:
      return "direct";
    case EstimatorKind::Quadratic:
      return "quadratic";
  }
  return "cheat";
}

EstimatorKind parse_estimator(std::string_view name) {
  if (name == "cheat") return EstimatorKind::Cheat;
  if (name == "direct") return EstimatorKind::Direct;
  if (name == "quadratic") return EstimatorKind::Quadratic;
  throw std::invalid_argument("unknown estimator: " + std::string(name));
}

BiasEstimate cheat_estimate(const PredictiveSummary& summary, const Oracle& oracle, Rng& rng,
                            int realizations, bool build_omega) {
  const Index n = oracle.grid().size();
  if (summary.mean.size() != n) throw std::invalid_argument("cheat_estimate: size mismatch");
  const int draws = oracle.spec().problem_type == ProblemType::TypeI ? 1 : realizations;
  if (draws < 1) throw std::invalid_argument("cheat_estimate: need at least one realization");
  Eigen::VectorXd mean_y = Eigen::VectorXd::Zero(n);
  for (int r = 0; r < draws; ++r) mean_y += oracle.sample_grid(rng);
  mean_y /= static_cast<double>(draws);

  BiasEstimate est;
  est.delta = summary.mean - mean_y;
  const Eigen::VectorXd sd = oracle.std_field();
  est.tau = TauVector::from_components(summary.variance, est.delta.cwiseAbs2(), sd.cwiseAbs2());
  if (build_omega) {
    auto omega = assemble_omega(sigma_F_from_members(summary.member_matrix),
                                direct_delta_to_matrix(est.delta),
                                sigma_Y_known(oracle.spec(), oracle.grid()));
    omega.delta_vec = est.delta;
    est.omega = std::move(omega);
  }
  return est;
}

Eigen::MatrixXd estimator_features(const StateGrid& grid, const PredictiveSummary& summary) {
  Eigen::MatrixXd h(grid.size(), 4);
  h.leftCols<2>() = grid.points;
  h.col(2) = summary.mean;
  h.col(3) = summary.variance;
  return h;
}

BiasEstimate direct_estimate(const PredictiveSummary& summary, const LabeledPool& pool,
                             const StateGrid& grid, const DirectEstimatorConfig& config,
                             bool build_omega) {
  const IndexList observed = pool.labeled_indices();
  if (observed.size() < 2) throw InvalidStateError("direct_estimate: need 2 observed indices");
  const Eigen::MatrixXd features = estimator_features(grid, summary);
  const auto m = static_cast<Index>(observed.size());
  Eigen::MatrixXd train_x(m, features.cols());
  Eigen::VectorXd train_y(m);
  for (Index a = 0; a < m; ++a) {
    const Index i = observed[a];
    train_x.row(a) = features.row(i);
    train_y(a) = config.target == DirectTarget::Bias
                     ? *empirical_bias(summary, pool, i)
                     : *empirical_omega_uncorrelated(summary, pool, i, i);
  }
  Eigen::VectorXd pred = direct_fit_predict(config, train_x, train_y, features);
  for (Index a = 0; a < m; ++a) pred(observed[a]) = train_y(a);

  BiasEstimate est;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(grid.size());
  if (config.target == DirectTarget::Bias) {
    est.delta = pred;
  } else {
    est.delta = (pred - summary.variance).cwiseMax(0.0).cwiseSqrt();
  }
  est.tau = TauVector::from_components(summary.variance, est.delta.cwiseAbs2(), zero);
  if (build_omega) {
    auto omega = assemble_omega(sigma_F_from_members(summary.member_matrix),
                                direct_delta_to_matrix(est.delta),
                                SymMatrix::Zero(grid.size(), grid.size()));
    omega.delta_vec = est.delta;
    est.omega = std::move(omega);
  }
  return est;
}

ObservedBias observed_bias(const PredictiveSummary& summary, const LabeledPool& pool) {
  ObservedBias out;
  out.indices = pool.labeled_indices();
  out.delta.resize(static_cast<Index>(out.indices.size()));
  for (std::size_t a = 0; a < out.indices.size(); ++a) {
    out.delta(static_cast<Index>(a)) = *empirical_bias(summary, pool, out.indices[a]);
  }
  return out;
}

QuadraticEstimator quadratic_fit(const QuadraticEstimatorConfig& config,
                                 const Eigen::MatrixXd& features, const ObservedBias& observed) {
  if (observed.indices.size() < 2) {
    throw InvalidStateError("quadratic_fit: need at least 2 observed indices");
  }
  const auto m = static_cast<Index>(observed.indices.size());
  Eigen::MatrixXd train(m, features.cols());
  for (Index a = 0; a < m; ++a) train.row(a) = features.row(observed.indices[a]);
  QuadraticEstimator estimator(config);
  estimator.fit(train, rank_one_targets(observed.delta));
  return estimator;
}

SymMatrix quadratic_predict_delta(const QuadraticEstimator& estimator,
                                  const QuadraticEstimatorConfig& config,
                                  const Eigen::MatrixXd& features, const ObservedBias& observed) {
  SymMatrix out = estimator.predict_matrix(features);
  if (config.overwrite_observed) {
    const auto m = static_cast<Index>(observed.indices.size());
    for (Index a = 0; a < m; ++a) {
      for (Index b = 0; b < m; ++b) {
        out(observed.indices[a], observed.indices[b]) = observed.delta(a) * observed.delta(b);
      }
    }
  }
  return out;
}

Eigen::VectorXd delta_from_matrix(const SymMatrix& delta_mat, const ObservedBias& observed) {
  const Eigen::VectorXd magnitude = delta_mat.diagonal().cwiseMax(0.0).cwiseSqrt();
  const auto eig = sym_eigen(delta_mat);
  Eigen::VectorXd delta(magnitude.size());
  for (Eigen::Index i = 0; i < magnitude.size(); ++i) {
    delta(i) = eig.vectors(i, 0) < 0.0 ? -magnitude(i) : magnitude(i);
  }
  double agreement = 0.0;
  for (std::size_t a = 0; a < observed.indices.size(); ++a) {
    agreement += delta(observed.indices[a]) * observed.delta(static_cast<Eigen::Index>(a));
  }
  if (agreement < 0.0) delta = -delta;
  return delta;
}

BiasEstimate quadratic_estimate(const PredictiveSummary& summary, const LabeledPool& pool,
                                const StateGrid& grid, const QuadraticEstimatorConfig& config,
                                bool build_omega) {
  const Eigen::MatrixXd features = estimator_features(grid, summary);
  const ObservedBias observed = observed_bias(summary, pool);
  const QuadraticEstimator estimator = quadratic_fit(config, features, observed);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(grid.size());

  BiasEstimate est;
  if (build_omega) {
    SymMatrix delta_mat = quadratic_predict_delta(estimator, config, features, observed);
    est.delta = delta_from_matrix(delta_mat, observed);
    est.tau = TauVector::from_components(summary.variance, delta_mat.diagonal(), zero);
    auto omega = assemble_omega(sigma_F_from_members(summary.member_matrix), delta_mat,
                                SymMatrix::Zero(grid.size(), grid.size()));
    omega.delta_vec = est.delta;
    est.omega = std::move(omega);
    return est;
  }
  Eigen::VectorXd diag = estimator.embed(features).rowwise().squaredNorm();
  if (config.overwrite_observed) {
    for (std::size_t a = 0; a < observed.indices.size(); ++a) {
      const double d = observed.delta(static_cast<Eigen::Index>(a));
      diag(observed.indices[a]) = d * d;
    }
  }
  est.delta = diag.cwiseSqrt();
  est.tau = TauVector::from_components(summary.variance, diag, zero);
  return est;
}

}  // namespace aicau
