#include "aicau/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "aicau/linalg.hpp"

namespace aicau {

std::string_view to_string(CorrelationMetric metric) {
  switch (metric) {
    case CorrelationMetric::Euclidean:
      return "euclidean";
    case CorrelationMetric::L1:
      return "l1";
    case CorrelationMetric::Linf:
      return "linf";
  }
  return "euclidean";
}

CorrelationMetric parse_correlation_metric(std::string_view name) {
  if (name == "euclidean") return CorrelationMetric::Euclidean;
  if (name == "l1") return CorrelationMetric::L1;
  if (name == "linf") return CorrelationMetric::Linf;
  throw std::invalid_argument("unknown correlation metric: " + std::string(name));
}

ProblemType parse_problem_type(int value) {
  if (value < 1 || value > 3) {
    throw std::invalid_argument("problem type must be 1, 2 or 3");
  }
  return static_cast<ProblemType>(value);
}

double mean_signal(const Point& x) {
  return std::sin(1.5 * x(0)) * std::sin(1.5 * x(1));
}

double noise_std(const OracleSpec& spec, const Point& x) {
  if (spec.problem_type == ProblemType::TypeI) return 0.0;
  const double mu = mean_signal(x);
  // sin can overshoot 1 by an ulp
  return std::sqrt(std::max(0.0, 1.0 - mu * mu)) * spec.noise_scale;
}

double point_distance(CorrelationMetric metric, const Point& a, const Point& b) {
  const Point d = a - b;
  switch (metric) {
    case CorrelationMetric::Euclidean:
      return d.norm();
    case CorrelationMetric::L1:
      return d.lpNorm<1>();
    case CorrelationMetric::Linf:
      return d.lpNorm<Eigen::Infinity>();
  }
  return d.norm();
}

double noise_correlation(const OracleSpec& spec, const Point& a, const Point& b) {
  const double d = point_distance(spec.correlation_metric, a, b);
  if (d == 0.0) return 1.0;
  return std::exp(-spec.correlation_rate * d);
}

Eigen::MatrixXd correlation_matrix(const OracleSpec& spec, const StateGrid& grid,
                                   const IndexList& indices) {
  const auto m = static_cast<Index>(indices.size());
  Eigen::MatrixXd c(m, m);
  for (Index a = 0; a < m; ++a) {
    c(a, a) = 1.0;
    for (Index b = 0; b < a; ++b) {
      c(a, b) = c(b, a) = noise_correlation(spec, grid.point(indices[a]), grid.point(indices[b]));
    }
  }
  return c;
}

namespace {

void check_indices(const StateGrid& grid, const IndexList& indices) {
  if (indices.empty()) throw std::invalid_argument("sample: empty index list");
  for (Index i : indices) {
    if (i < 0 || i >= grid.size()) throw std::invalid_argument("sample: index out of range");
  }
}

NoisyDraw sample_with_factor(const OracleSpec& spec, const StateGrid& grid,
                             const IndexList& indices, const Eigen::MatrixXd* factor,
                             Rng& rng, int round_tag) {
  NoisyDraw draw;
  draw.point_indices = indices;
  draw.round_tag = round_tag;
  const auto m = static_cast<Index>(indices.size());
  draw.values.resize(indices.size());
  for (Index a = 0; a < m; ++a) draw.values[a] = mean_signal(grid.point(indices[a]));
  if (spec.problem_type == ProblemType::TypeI) return draw;

  Eigen::VectorXd eps(m);
  for (Index a = 0; a < m; ++a) eps(a) = rng.normal();
  if (spec.problem_type == ProblemType::TypeIII) {
    eps = factor->triangularView<Eigen::Lower>() * eps;
  }
  for (Index a = 0; a < m; ++a) {
    draw.values[a] += noise_std(spec, grid.point(indices[a])) * eps(a);
  }
  return draw;
}

}  // namespace

NoisyDraw sample(const OracleSpec& spec, const StateGrid& grid, const IndexList& indices,
                 Rng& rng, int round_tag) {
  check_indices(grid, indices);
  if (spec.problem_type != ProblemType::TypeIII) {
    return sample_with_factor(spec, grid, indices, nullptr, rng, round_tag);
  }
  const auto factor = cholesky(correlation_matrix(spec, grid, indices));
  return sample_with_factor(spec, grid, indices, &factor.lower, rng, round_tag);
}

Oracle::Oracle(OracleSpec spec, const StateGrid& grid) : spec_(spec), grid_(&grid) {
  if (spec_.noise_scale < 0.0) throw std::invalid_argument("Oracle: noise_scale must be >= 0");
}

NoisyDraw Oracle::sample(const IndexList& indices, Rng& rng, int round_tag) const {
  return aicau::sample(spec_, *grid_, indices, rng, round_tag);
}

Eigen::VectorXd Oracle::sample_grid(Rng& rng) const {
  IndexList all(static_cast<std::size_t>(grid_->size()));
  for (Index i = 0; i < grid_->size(); ++i) all[i] = i;
  const Eigen::MatrixXd* factor = nullptr;
  if (spec_.problem_type == ProblemType::TypeIII) {
    if (!grid_factor_) grid_factor_ = cholesky(correlation_matrix(spec_, *grid_, all)).lower;
    factor = &*grid_factor_;
  }
  const NoisyDraw draw = sample_with_factor(spec_, *grid_, all, factor, rng, 0);
  return Eigen::Map<const Eigen::VectorXd>(draw.values.data(), grid_->size());
}

Eigen::VectorXd Oracle::mean_field() const {
  Eigen::VectorXd out(grid_->size());
  for (Index i = 0; i < grid_->size(); ++i) out(i) = mean_signal(grid_->point(i));
  return out;
}

Eigen::VectorXd Oracle::std_field() const {
  Eigen::VectorXd out(grid_->size());
  for (Index i = 0; i < grid_->size(); ++i) out(i) = noise_std(spec_, grid_->point(i));
  return out;
}

}  // namespace aicau
