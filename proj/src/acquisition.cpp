#include "aicau/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "aicau/errors.hpp"

namespace aicau {

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::Random:
      return "random";
    case Strategy::LeastConfidence:
      return "lc";
    case Strategy::Bald:
      return "bald";
    case Strategy::BiasReduction:
      return "br";
    case Strategy::Pemse:
      return "pemse";
    case Strategy::DiffLc:
      return "diff-lc";
    case Strategy::DiffBr:
      return "diff-br";
    case Strategy::DiffPemse:
      return "diff-pemse";
  }
  return "random";
}

Strategy parse_strategy(std::string_view name) {
  for (Strategy s : {Strategy::Random, Strategy::LeastConfidence, Strategy::Bald,
                     Strategy::BiasReduction, Strategy::Pemse, Strategy::DiffLc,
                     Strategy::DiffBr, Strategy::DiffPemse}) {
    if (to_string(s) == name) return s;
  }
  throw std::invalid_argument("unknown strategy: " + std::string(name));
}

bool is_difference(Strategy strategy) {
  return strategy == Strategy::DiffLc || strategy == Strategy::DiffBr ||
         strategy == Strategy::DiffPemse;
}

Strategy base_strategy(Strategy strategy) {
  switch (strategy) {
    case Strategy::DiffLc:
      return Strategy::LeastConfidence;
    case Strategy::DiffBr:
      return Strategy::BiasReduction;
    case Strategy::DiffPemse:
      return Strategy::Pemse;
    default:
      return strategy;
  }
}

bool needs_bias(Strategy strategy) {
  const Strategy base = base_strategy(strategy);
  return base == Strategy::BiasReduction || base == Strategy::Pemse;
}

std::string_view to_string(BatchMode mode) {
  switch (mode) {
    case BatchMode::Single:
      return "single";
    case BatchMode::TopM:
      return "topm";
    case BatchMode::Eigen:
      return "eigen";
  }
  return "single";
}

BatchMode parse_batch_mode(std::string_view name) {
  if (name == "single") return BatchMode::Single;
  if (name == "topm") return BatchMode::TopM;
  if (name == "eigen") return BatchMode::Eigen;
  throw std::invalid_argument("unknown batch mode: " + std::string(name));
}

bool BatchSelection::used_fallback() const {
  return std::any_of(provenance.begin(), provenance.end(),
                     [](const SelectionProvenance& p) { return p.fallback; });
}

Eigen::VectorXd kappa(const Eigen::VectorXd& prev, const Eigen::VectorXd& curr) {
  if (prev.size() != curr.size()) throw std::invalid_argument("kappa: length mismatch");
  return prev - curr;
}

std::vector<bool> eligible_mask(const std::vector<bool>& labeled, bool allow_repeats) {
  std::vector<bool> out(labeled.size(), true);
  if (!allow_repeats) {
    for (std::size_t i = 0; i < labeled.size(); ++i) out[i] = !labeled[i];
  }
  return out;
}

AcquisitionScores score(Strategy strategy, const TauVector& tau, const TauVector* prev,
                        const std::vector<bool>& eligible, Rng& rng,
                        const ScoreOptions& options) {
  const Eigen::Index n = tau.tau.size();
  if (static_cast<Eigen::Index>(eligible.size()) != n) {
    throw std::invalid_argument("score: eligibility mask size mismatch");
  }
  if (is_difference(strategy) && prev == nullptr) {
    throw UnavailableError("score: " + std::string(to_string(strategy)) +
                           " needs estimates from two rounds");
  }
  AcquisitionScores out;
  out.strategy = strategy;
  out.eligible = eligible;
  switch (strategy) {
    case Strategy::Random:
      out.values.resize(n);
      for (Eigen::Index i = 0; i < n; ++i) out.values(i) = rng.uniform();
      break;
    case Strategy::LeastConfidence:
      out.values = tau.epistemic;
      break;
    case Strategy::Bald:
      out.values =
          0.5 * (1.0 + tau.epistemic.array() / options.bald_noise_variance).log().matrix();
      break;
    case Strategy::BiasReduction:
      out.values = tau.bias_sq;
      break;
    case Strategy::Pemse:
      out.values = tau.reducible;
      break;
    case Strategy::DiffLc:
      out.values = kappa(prev->epistemic, tau.epistemic);
      break;
    case Strategy::DiffBr:
      out.values = kappa(prev->bias_sq, tau.bias_sq);
      break;
    case Strategy::DiffPemse:
      out.values = kappa(prev->tau, tau.tau);
      break;
  }
  return out;
}

Index select_single(const AcquisitionScores& scores) {
  Index best = -1;
  for (Index i = 0; i < scores.values.size(); ++i) {
    if (!scores.eligible[i]) continue;
    if (best < 0 || scores.values(i) > scores.values(best)) best = i;
  }
  if (best < 0) throw ExhaustedPoolError("select_single: no eligible index");
  return best;
}

namespace {

/// Eligible indices sorted by descending key, ties by ascending index.
IndexList ranked(const Eigen::VectorXd& key, const std::vector<bool>& eligible) {
  IndexList idx;
  for (Index i = 0; i < key.size(); ++i) {
    if (eligible[i]) idx.push_back(i);
  }
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) { return key(a) > key(b); });
  return idx;
}

}  // namespace

BatchSelection select_batch_topm(const AcquisitionScores& scores, int m) {
  if (m < 1) throw std::invalid_argument("select_batch_topm: m must be positive");
  const IndexList order = ranked(scores.values, scores.eligible);
  if (static_cast<int>(order.size()) < m) {
    throw ExhaustedPoolError("select_batch_topm: fewer eligible indices than the batch size");
  }
  BatchSelection out;
  out.mode = BatchMode::TopM;
  out.indices.assign(order.begin(), order.begin() + m);
  out.provenance.assign(static_cast<std::size_t>(m), SelectionProvenance{});
  return out;
}

BatchSelection select_batch_eigen(const SymMatrix& matrix, int m,
                                  const std::vector<bool>& eligible,
                                  const EigenBatchOptions& options) {
  if (m < 1) throw std::invalid_argument("select_batch_eigen: m must be positive");
  if (matrix.rows() != matrix.cols() ||
      static_cast<Eigen::Index>(eligible.size()) != matrix.rows()) {
    throw std::invalid_argument("select_batch_eigen: dimension mismatch");
  }
  const Eigen::Index n = matrix.rows();
  const auto n_eligible = std::count(eligible.begin(), eligible.end(), true);
  if (n_eligible == 0 || (options.distinct && n_eligible < m)) {
    throw ExhaustedPoolError("select_batch_eigen: not enough eligible indices");
  }

  const SymMatrix target =
      options.mode == EigenMode::Omega ? psd_project(matrix) : symmetrize(matrix);
  const auto eig = sym_eigen(target);
  const double scale = std::max(eig.values.cwiseAbs().maxCoeff(), 0.0);
  const double threshold = options.rank_tolerance * scale;

  BatchSelection out;
  out.mode = BatchMode::Eigen;
  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  for (Eigen::Index j = 0; j < n && static_cast<int>(out.indices.size()) < m; ++j) {
    const double lambda = eig.values(j);
    if (!(lambda > threshold)) break;
    Index best = -1;
    double best_abs = -1.0;
    for (Index i = 0; i < n; ++i) {
      if (!eligible[i] || (options.distinct && taken[i])) continue;
      const double v = std::abs(eig.vectors(i, j));
      if (v > best_abs) {
        best_abs = v;
        best = i;
      }
    }
    if (best < 0) break;
    taken[best] = true;
    out.indices.push_back(best);
    out.provenance.push_back({static_cast<int>(j), lambda, best_abs, false});
  }

  if (static_cast<int>(out.indices.size()) < m) {
    std::vector<bool> open = eligible;
    if (options.distinct) {
      for (Index i = 0; i < n; ++i) open[i] = open[i] && !taken[i];
    }
    const Eigen::VectorXd diag = target.diagonal();
    const IndexList order = ranked(diag, open);
    std::size_t next = 0;
    while (static_cast<int>(out.indices.size()) < m) {
      const Index i = order[next % order.size()];
      ++next;
      out.indices.push_back(i);
      out.provenance.push_back({-1, 0.0, diag(i), true});
    }
  }
  return out;
}

}  // namespace aicau
