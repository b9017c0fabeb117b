#ifndef AICAU_ORACLE_HPP
#define AICAU_ORACLE_HPP

#include <Eigen/Dense>

#include <numbers>
#include <optional>
#include <string_view>
#include <vector>

#include "aicau/grid.hpp"
#include "aicau/rng.hpp"

namespace aicau {

/// Noise regime of the simulated oracle: noiseless, independent
/// heteroskedastic noise, or spatially correlated heteroskedastic noise.
enum class ProblemType { TypeI = 1, TypeII = 2, TypeIII = 3 };

/// Distance used inside the noise correlation kernel.
enum class CorrelationMetric { Euclidean, L1, Linf };

std::string_view to_string(CorrelationMetric metric);
CorrelationMetric parse_correlation_metric(std::string_view name);
ProblemType parse_problem_type(int value);

struct OracleSpec {
  ProblemType problem_type = ProblemType::TypeII;
  double noise_scale = 0.1;
  /// Decay rate of the correlation kernel exp(-rate * d).
  double correlation_rate = 2.0 / std::numbers::pi;
  CorrelationMetric correlation_metric = CorrelationMetric::Euclidean;
  std::uint64_t rng_seed = 0;
};

/// One batch of oracle realizations, drawn together.
struct NoisyDraw {
  IndexList point_indices;
  std::vector<double> values;
  int round_tag = 0;
};

/// sin(3 x1 / 2) * sin(3 x2 / 2).
double mean_signal(const Point& x);

/// Standard deviation of the aleatoric noise at x; identically zero for
/// TypeI.
double noise_std(const OracleSpec& spec, const Point& x);

double point_distance(CorrelationMetric metric, const Point& a, const Point& b);

/// exp(-rate * d(a, b)).
double noise_correlation(const OracleSpec& spec, const Point& a, const Point& b);

/// Correlation matrix of the noise at `indices` (duplicates allowed).
Eigen::MatrixXd correlation_matrix(const OracleSpec& spec, const StateGrid& grid,
                                   const IndexList& indices);

/// Draws one realization per index. TypeIII draws the whole list jointly.
/// TypeI consumes no randomness; TypeII and TypeIII consume exactly
/// indices.size() standard normals, in order.
NoisyDraw sample(const OracleSpec& spec, const StateGrid& grid, const IndexList& indices,
                 Rng& rng, int round_tag = 0);

/// Oracle bound to a grid. Caches the correlation factor of the full grid,
/// which grid-wide repeated draws need.
class Oracle {
 public:
  Oracle(OracleSpec spec, const StateGrid& grid);

  const OracleSpec& spec() const { return spec_; }
  const StateGrid& grid() const { return *grid_; }

  NoisyDraw sample(const IndexList& indices, Rng& rng, int round_tag = 0) const;

  /// One realization at every grid index, jointly for TypeIII.
  Eigen::VectorXd sample_grid(Rng& rng) const;

  Eigen::VectorXd mean_field() const;
  Eigen::VectorXd std_field() const;

 private:
  OracleSpec spec_;
  const StateGrid* grid_;
  mutable std::optional<Eigen::MatrixXd> grid_factor_;
};

}  // namespace aicau

#endif  // AICAU_ORACLE_HPP
