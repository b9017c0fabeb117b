#include "aicau/pool.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

#include "aicau/errors.hpp"

namespace aicau {

LabeledPool::LabeledPool(Index grid_size, bool allow_repeats)
    : observations_(static_cast<std::size_t>(grid_size)), allow_repeats_(allow_repeats) {}

std::vector<bool> LabeledPool::labeled_mask() const {
  std::vector<bool> mask(observations_.size());
  for (std::size_t i = 0; i < observations_.size(); ++i) mask[i] = !observations_[i].empty();
  return mask;
}

IndexList LabeledPool::labeled_indices() const {
  IndexList out;
  for (std::size_t i = 0; i < observations_.size(); ++i) {
    if (!observations_[i].empty()) out.push_back(static_cast<Index>(i));
  }
  return out;
}

Index LabeledPool::labeled_count() const {
  Index n = 0;
  for (const auto& obs : observations_) n += obs.empty() ? 0 : 1;
  return n;
}

Index LabeledPool::observation_count() const {
  Index n = 0;
  for (const auto& obs : observations_) n += static_cast<Index>(obs.size());
  return n;
}

void LabeledPool::commit(const NoisyDraw& draw) {
  if (draw.point_indices.size() != draw.values.size()) {
    throw std::invalid_argument("commit: draw values not aligned with indices");
  }
  for (Index i : draw.point_indices) {
    if (i < 0 || i >= grid_size()) throw std::invalid_argument("commit: index out of range");
  }
  if (!allow_repeats_) {
    std::vector<bool> seen(observations_.size(), false);
    for (Index i : draw.point_indices) {
      if (is_labeled(i) || seen[i]) {
        throw ConstraintViolation("commit: index " + std::to_string(i) +
                                  " already labeled in a noiseless pool");
      }
      seen[i] = true;
    }
  }
  const int tag = round_ + 1;
  for (std::size_t a = 0; a < draw.point_indices.size(); ++a) {
    observations_[draw.point_indices[a]].push_back({draw.values[a], tag});
  }
  history_.push_back(draw.point_indices);
  round_ = tag;
}

nlohmann::json LabeledPool::to_json() const {
  nlohmann::json obs = nlohmann::json::array();
  for (std::size_t i = 0; i < observations_.size(); ++i) {
    for (const auto& o : observations_[i]) {
      obs.push_back({{"index", i}, {"value", o.value}, {"round", o.round_tag}});
    }
  }
  return {{"grid_size", observations_.size()},
          {"allow_repeats", allow_repeats_},
          {"round", round_},
          {"history", history_},
          {"observations", obs}};
}

LabeledPool LabeledPool::from_json(const nlohmann::json& j) {
  LabeledPool pool(j.at("grid_size").get<Index>(), j.at("allow_repeats").get<bool>());
  pool.round_ = j.at("round").get<int>();
  pool.history_ = j.at("history").get<std::vector<IndexList>>();
  for (const auto& o : j.at("observations")) {
    const auto i = o.at("index").get<Index>();
    if (i < 0 || i >= pool.grid_size()) {
      throw std::invalid_argument("LabeledPool::from_json: index out of range");
    }
    pool.observations_[i].push_back({o.at("value").get<double>(), o.at("round").get<int>()});
  }
  return pool;
}

LabeledPool init_pool(const StateGrid& grid, int n_init, const Oracle& oracle, Rng& pool_rng,
                      Rng& oracle_rng) {
  if (n_init < 1 || n_init > grid.size()) {
    throw std::invalid_argument("init_pool: n_init must lie in [1, grid size]");
  }
  // partial Fisher-Yates
  IndexList perm(static_cast<std::size_t>(grid.size()));
  std::iota(perm.begin(), perm.end(), Index{0});
  for (int a = 0; a < n_init; ++a) {
    const auto b = a + pool_rng.index(perm.size() - a);
    std::swap(perm[a], perm[b]);
  }
  perm.resize(n_init);

  LabeledPool pool(grid.size(), oracle.spec().problem_type != ProblemType::TypeI);
  pool.commit(oracle.sample(perm, oracle_rng, 0));
  return pool;
}

void commit_queries(LabeledPool& pool, const IndexList& indices, const NoisyDraw& draw) {
  if (indices != draw.point_indices) {
    throw std::invalid_argument("commit_queries: draw does not match the query indices");
  }
  pool.commit(draw);
}

}  // namespace aicau
