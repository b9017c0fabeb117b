#ifndef AICAU_ENSEMBLE_HPP
#define AICAU_ENSEMBLE_HPP

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <vector>

#include "aicau/grid.hpp"
#include "aicau/nn.hpp"
#include "aicau/pool.hpp"

namespace aicau {

struct EnsembleConfig {
  int n_members = 5;
  std::vector<int> hidden_sizes{32, 32, 16};
  AdamConfig adam{};
  /// Fraction of observation rows each member trains on; members hold out
  /// complementary folds of a shared random partition.
  double bag_fraction = 0.8;
  double min_delta = 1e-4;
  int patience = 10;
  int max_epochs = 500;
  /// Rows per gradient step; 0 means full batch.
  int batch_size = 0;
  std::uint64_t rng_seed = 0;
};

/// Per-feature affine map to zero mean and unit variance.
struct InputScaler {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static InputScaler fit(const Eigen::MatrixXd& x);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
};

struct EnsembleModel {
  std::vector<Mlp> members;
  InputScaler scaler;
  int training_round = 0;

  nlohmann::json to_json() const;
  static EnsembleModel from_json(const nlohmann::json& j);
};

/// Predictive distribution over the grid. member_matrix is K x n.
struct PredictiveSummary {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
  Eigen::MatrixXd member_matrix;
};

/// Loss history of one member, for diagnostics and tests.
struct MemberTrace {
  std::vector<double> losses;
  /// Epochs at which the early-stopping counter reset (loss improved by more
  /// than min_delta).
  std::vector<int> reset_epochs;
  int bag_size = 0;
};

/// Training rows (one per observation): 2 x N inputs and N targets.
void pool_training_rows(const LabeledPool& pool, const StateGrid& grid, Eigen::MatrixXd& x,
                        Eigen::VectorXd& y);

EnsembleModel fit(const LabeledPool& pool, const StateGrid& grid, const EnsembleConfig& config,
                  int training_round = 0, std::vector<MemberTrace>* traces = nullptr);

/// Same training procedure on explicit rows (2 x N inputs).
EnsembleModel fit_rows(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       const EnsembleConfig& config, int training_round = 0,
                       std::vector<MemberTrace>* traces = nullptr);

/// Mean and sample variance (divisor K - 1) per column.
PredictiveSummary summarize(const Eigen::MatrixXd& member_matrix);

PredictiveSummary predict(const EnsembleModel& model, const StateGrid& grid);

}  // namespace aicau

#endif  // AICAU_ENSEMBLE_HPP
