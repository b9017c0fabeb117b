#include "aicau/grid.hpp"

#include <numbers>
#include <stdexcept>

namespace aicau {

StateGrid build_grid(int resolution) {
  if (resolution < 2) {
    throw std::invalid_argument("build_grid: resolution must be at least 2");
  }
  const Eigen::VectorXd axis =
      Eigen::VectorXd::LinSpaced(resolution, 0.0, 2.0 * std::numbers::pi);
  StateGrid grid;
  grid.resolution = resolution;
  grid.points.resize(static_cast<Index>(resolution) * resolution, 2);
  Index row = 0;
  for (int a = 0; a < resolution; ++a) {
    for (int b = 0; b < resolution; ++b, ++row) {
      grid.points(row, 0) = axis(a);
      grid.points(row, 1) = axis(b);
    }
  }
  return grid;
}

}  // namespace aicau
