#ifndef AICAU_ACQUISITION_HPP
#define AICAU_ACQUISITION_HPP

#include <Eigen/Dense>

#include <string_view>
#include <vector>

#include "aicau/cobias.hpp"
#include "aicau/grid.hpp"
#include "aicau/linalg.hpp"
#include "aicau/rng.hpp"

namespace aicau {

enum class Strategy {
  Random,
  LeastConfidence,
  Bald,
  BiasReduction,
  Pemse,
  DiffLc,
  DiffBr,
  DiffPemse,
};

/// Stable identifiers: random, lc, bald, br, pemse, diff-lc, diff-br,
/// diff-pemse.
std::string_view to_string(Strategy strategy);
Strategy parse_strategy(std::string_view name);

bool is_difference(Strategy strategy);
/// Non-difference counterpart (identity for non-difference strategies).
Strategy base_strategy(Strategy strategy);
/// Whether the strategy consumes a bias estimate.
bool needs_bias(Strategy strategy);

enum class BatchMode { Single, TopM, Eigen };

std::string_view to_string(BatchMode mode);
BatchMode parse_batch_mode(std::string_view name);

struct AcquisitionScores {
  Strategy strategy = Strategy::Random;
  Eigen::VectorXd values;
  std::vector<bool> eligible;
};

/// Per-slot record of an eigen-batch selection.
struct SelectionProvenance {
  /// Eigenpair rank (0-based), or -1 for a fallback slot.
  int eigen_rank = -1;
  double eigenvalue = 0.0;
  double component = 0.0;
  bool fallback = false;
};

struct BatchSelection {
  IndexList indices;
  BatchMode mode = BatchMode::TopM;
  std::vector<SelectionProvenance> provenance;

  bool used_fallback() const;
};

/// kappa[g](x) = g_prev(x) - g_curr(x).
Eigen::VectorXd kappa(const Eigen::VectorXd& prev, const Eigen::VectorXd& curr);

/// Eligibility: unlabeled indices when repeats are forbidden, else all.
std::vector<bool> eligible_mask(const std::vector<bool>& labeled, bool allow_repeats);

struct ScoreOptions {
  /// Noise variance of the Gaussian BALD approximation.
  double bald_noise_variance = 0.01;
};

/// Scores every grid index. Difference strategies require `prev`; without it
/// they throw UnavailableError.
AcquisitionScores score(Strategy strategy, const TauVector& tau, const TauVector* prev,
                        const std::vector<bool>& eligible, Rng& rng,
                        const ScoreOptions& options = {});

/// Eligible argmax, lowest index on ties.
Index select_single(const AcquisitionScores& scores);

/// The m highest eligible scores, descending, distinct.
BatchSelection select_batch_topm(const AcquisitionScores& scores, int m);

enum class EigenMode { Omega, OmegaDifference };

struct EigenBatchOptions {
  EigenMode mode = EigenMode::Omega;
  /// Forbid selecting the same index twice within the batch.
  bool distinct = false;
  /// Relative threshold below which an eigenvalue counts as zero.
  double rank_tolerance = 1e-10;
};

/// One index per leading positive eigenpair: argmax_i |v_j(i)| over eligible
/// indices. Omega mode projects the matrix onto the PSD cone first. Slots
/// left once usable eigenpairs run out are filled from the largest remaining
/// diagonal entries and marked as fallback.
BatchSelection select_batch_eigen(const SymMatrix& matrix, int m,
                                  const std::vector<bool>& eligible,
                                  const EigenBatchOptions& options = {});

}  // namespace aicau

#endif  // AICAU_ACQUISITION_HPP
