#ifndef AICAU_COBIAS_HPP
#define AICAU_COBIAS_HPP

#include <Eigen/Dense>

#include <optional>
#include <string_view>

#include "aicau/ensemble.hpp"
#include "aicau/gp.hpp"
#include "aicau/linalg.hpp"
#include "aicau/oracle.hpp"
#include "aicau/pool.hpp"
#include "aicau/quadratic.hpp"

namespace aicau {

/// Pointwise expected squared error split into its three components.
struct TauVector {
  Eigen::VectorXd tau;
  Eigen::VectorXd reducible;
  Eigen::VectorXd epistemic;
  Eigen::VectorXd bias_sq;
  Eigen::VectorXd aleatoric;

  static TauVector from_components(const Eigen::VectorXd& epistemic,
                                   const Eigen::VectorXd& bias_sq,
                                   const Eigen::VectorXd& aleatoric);
};

/// Omega = Sigma_F + Delta + Sigma_Y over the grid, with its components.
struct OmegaDecomposition {
  SymMatrix sigma_F;
  Eigen::VectorXd delta_vec;
  SymMatrix delta_mat;
  SymMatrix sigma_Y;
  SymMatrix omega;
  int round = 0;
};

/// Mean ensemble prediction minus the mean observation at index i; empty when
/// i has no observations.
std::optional<double> empirical_bias(const PredictiveSummary& summary, const LabeledPool& pool,
                                     Index i);

/// omega(x_i, x_j) assuming independent realizations: all observation pairs
/// at i and j are combined. For i == j each observation pairs only with
/// itself. Empty when either index is unobserved.
std::optional<double> empirical_omega_uncorrelated(const PredictiveSummary& summary,
                                                   const LabeledPool& pool, Index i, Index j);

/// omega(x_i, x_j) from co-realized pairs only (same round tag). Empty when
/// no such pair exists.
std::optional<double> empirical_omega_correlated(const PredictiveSummary& summary,
                                                 const LabeledPool& pool, Index i, Index j);

OmegaDecomposition assemble_omega(const SymMatrix& sigma_F, const SymMatrix& delta_mat,
                                  const SymMatrix& sigma_Y, int round = 0);

/// Member sample covariance across the grid (divisor K - 1).
SymMatrix sigma_F_from_members(const Eigen::MatrixXd& member_matrix);

/// True aleatoric covariance of the oracle over the grid.
SymMatrix sigma_Y_known(const OracleSpec& spec, const StateGrid& grid);

/// delta * delta^T.
SymMatrix direct_delta_to_matrix(const Eigen::VectorXd& delta);

enum class EstimatorKind { Cheat, Direct, Quadratic };

std::string_view to_string(EstimatorKind kind);
EstimatorKind parse_estimator(std::string_view name);

/// Output of any estimation back end for one round.
struct BiasEstimate {
  TauVector tau;
  /// Signed where the sign is known; magnitudes otherwise.
  Eigen::VectorXd delta;
  std::optional<OmegaDecomposition> omega;
};

/// Perfect-information estimate: bias against the mean of `realizations`
/// fresh grid-wide oracle draws (one exact draw for TypeI), true Sigma_Y.
BiasEstimate cheat_estimate(const PredictiveSummary& summary, const Oracle& oracle, Rng& rng,
                            int realizations = 10, bool build_omega = false);

/// Per-point features [x1, x2, mu_F, sigma_F^2], one row per grid index.
Eigen::MatrixXd estimator_features(const StateGrid& grid, const PredictiveSummary& summary);

/// GP-based estimate. Observed indices keep their empirical values.
BiasEstimate direct_estimate(const PredictiveSummary& summary, const LabeledPool& pool,
                             const StateGrid& grid, const DirectEstimatorConfig& config,
                             bool build_omega = false);

/// Observed bias-first entries (delta_i * delta_j) for the training pairs.
struct ObservedBias {
  IndexList indices;
  Eigen::VectorXd delta;
};
ObservedBias observed_bias(const PredictiveSummary& summary, const LabeledPool& pool);

QuadraticEstimator quadratic_fit(const QuadraticEstimatorConfig& config,
                                 const Eigen::MatrixXd& features, const ObservedBias& observed);

/// Full predicted Delta over the rows of `features`. Entries with both
/// indices observed are replaced by their empirical products when
/// config.overwrite_observed is set.
SymMatrix quadratic_predict_delta(const QuadraticEstimator& estimator,
                                  const QuadraticEstimatorConfig& config,
                                  const Eigen::MatrixXd& features, const ObservedBias& observed);

/// Signed bias from a completed Delta: magnitudes sqrt(diag), signs from the
/// top eigenvector, global sign matched to the observed empirical biases.
Eigen::VectorXd delta_from_matrix(const SymMatrix& delta_mat, const ObservedBias& observed);

BiasEstimate quadratic_estimate(const PredictiveSummary& summary, const LabeledPool& pool,
                                const StateGrid& grid, const QuadraticEstimatorConfig& config,
                                bool build_omega = false);

}  // namespace aicau

#endif  // AICAU_COBIAS_HPP
