#ifndef AICAU_HARNESS_HPP
#define AICAU_HARNESS_HPP

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "aicau/acquisition.hpp"
#include "aicau/cobias.hpp"
#include "aicau/ensemble.hpp"
#include "aicau/gp.hpp"
#include "aicau/oracle.hpp"
#include "aicau/quadratic.hpp"

namespace aicau {

inline constexpr const char* kVersion = "0.1.0";

struct ExperimentConfig {
  ProblemType problem_type = ProblemType::TypeII;
  Strategy strategy = Strategy::Random;
  EstimatorKind estimator = EstimatorKind::Cheat;
  BatchMode batch_mode = BatchMode::Single;
  int n_init = 20;
  int n_rounds = 15;
  int batch_size = 1;
  int grid_resolution = 20;
  int n_replicates = 5;
  std::uint64_t base_seed = 0;
  std::string output_path = "out";
  /// Worker threads for replicates; results do not depend on it.
  int jobs = 1;

  /// problem_type above overrides oracle.problem_type.
  OracleSpec oracle{};
  EnsembleConfig ensemble{};
  DirectEstimatorConfig direct{};
  QuadraticEstimatorConfig quadratic{};
  int cheat_realizations = 10;
  ScoreOptions scoring{};
  bool distinct_batch = false;

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;

  /// Flat key-value form. from_json starts from `base` and rejects unknown
  /// keys.
  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_json(const nlohmann::json& j, ExperimentConfig base);
};

/// Grid 20, 20 initial points, 15 rounds, 5 replicates.
ExperimentConfig desk_preset();
/// Grid 50, 10 replicates; 100 initial points and 50 single rounds, or 10
/// initial points and 10 rounds of 10 when `batched`.
ExperimentConfig full_preset(bool batched);

struct RoundRow {
  int round = 0;
  int n_labeled = 0;
  double mse = 0.0;
  IndexList selected;
  double wall_ms = 0.0;
  /// Difference strategy scored with its base strategy this round.
  bool strategy_fallback = false;
  /// Eigen batch filled at least one slot from the diagonal.
  bool eigen_fallback = false;
};

struct RunRecord {
  std::uint64_t seed = 0;
  /// Ground-truth MSE of the ensemble trained on the initial pool.
  double initial_mse = 0.0;
  int initial_labeled = 0;
  std::vector<RoundRow> rows;
  bool failed = false;
  std::string error;
};

/// (1/n) sum_i (prediction_i - truth_i)^2.
double mse_vs_truth(const Eigen::VectorXd& prediction, const Eigen::VectorXd& truth);

RunRecord run_replicate(const ExperimentConfig& config, std::uint64_t replicate_seed);

/// Replicates with seeds base_seed + r, run on config.jobs threads.
std::vector<RunRecord> run_experiment(const ExperimentConfig& config);

struct SummaryRow {
  int round = 0;
  int count = 0;
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
};

/// Linear-interpolation quantile of unsorted values, q in [0, 1].
double quantile(std::vector<double> values, double q);

/// Per-round median and quartiles over non-failed replicates; round 0 is the
/// initial fit.
std::vector<SummaryRow> summarize_runs(const std::vector<RunRecord>& records);

std::string runs_csv(const std::vector<RunRecord>& records, const ExperimentConfig& config);
std::string summary_csv(const std::vector<RunRecord>& records, const ExperimentConfig& config);

struct Curve {
  std::string label;
  std::vector<double> rounds;
  std::vector<double> values;
};

/// Line chart of the curves with a log-scale y axis.
std::string mse_curve_svg(const std::vector<Curve>& curves);

/// Median curves from every summary.csv in `dir` and its direct children.
std::vector<Curve> load_summary_curves(const std::filesystem::path& dir);

/// Writes runs.csv, summary.csv, mse_curve.svg and config.json under `dir`.
void emit_outputs(const std::vector<RunRecord>& records, const ExperimentConfig& config,
                  const std::filesystem::path& dir);

/// Fails early with std::runtime_error when `dir` cannot be written.
void ensure_writable(const std::filesystem::path& dir);

}  // namespace aicau

#endif  // AICAU_HARNESS_HPP
