#ifndef AICAU_POOL_HPP
#define AICAU_POOL_HPP

#include <nlohmann/json.hpp>

#include <vector>

#include "aicau/grid.hpp"
#include "aicau/oracle.hpp"
#include "aicau/rng.hpp"

namespace aicau {

struct Observation {
  double value = 0.0;
  int round_tag = 0;
};

/// All labeled data L_k: per-index observation lists tagged with the round
/// (= joint draw) they came from, plus the per-round query history.
class LabeledPool {
 public:
  LabeledPool() = default;
  LabeledPool(Index grid_size, bool allow_repeats);

  Index grid_size() const { return static_cast<Index>(observations_.size()); }
  bool allow_repeats() const { return allow_repeats_; }
  int round() const { return round_; }

  bool is_labeled(Index i) const { return !observations_[i].empty(); }
  const std::vector<Observation>& observations(Index i) const { return observations_[i]; }
  std::vector<bool> labeled_mask() const;

  /// Distinct labeled indices, ascending.
  IndexList labeled_indices() const;
  Index labeled_count() const;
  Index observation_count() const;

  /// Q_0 (initial labels) followed by Q_1, Q_2, ...
  const std::vector<IndexList>& history() const { return history_; }

  /// Appends `draw` as round `round() + 1` (round 0 for the first commit of a
  /// fresh pool) and advances the round counter.
  void commit(const NoisyDraw& draw);

  nlohmann::json to_json() const;
  static LabeledPool from_json(const nlohmann::json& j);

 private:
  std::vector<std::vector<Observation>> observations_;
  std::vector<IndexList> history_;
  bool allow_repeats_ = true;
  int round_ = -1;
};

/// `n_init` distinct indices drawn uniformly without replacement from
/// `pool_rng`, labeled with one (joint) oracle draw from `oracle_rng`.
LabeledPool init_pool(const StateGrid& grid, int n_init, const Oracle& oracle, Rng& pool_rng,
                      Rng& oracle_rng);

/// Commits a query batch. Throws ConstraintViolation on a repeat index when
/// the pool forbids repeats; the pool is left unchanged in that case.
void commit_queries(LabeledPool& pool, const IndexList& indices, const NoisyDraw& draw);

}  // namespace aicau

#endif  // AICAU_POOL_HPP
