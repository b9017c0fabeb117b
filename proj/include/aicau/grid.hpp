#ifndef AICAU_GRID_HPP
#define AICAU_GRID_HPP

#include <Eigen/Dense>

#include <vector>

namespace aicau {

using Point = Eigen::Vector2d;
using Index = Eigen::Index;
using IndexList = std::vector<Index>;

/// Row-major Cartesian product of `resolution` equally spaced values on
/// [0, 2*pi], both ends included. Row i of `points` is grid point i.
struct StateGrid {
  int resolution = 0;
  Eigen::MatrixX2d points;

  Index size() const { return points.rows(); }
  Point point(Index i) const { return points.row(i).transpose(); }
};

StateGrid build_grid(int resolution);

}  // namespace aicau

#endif  // AICAU_GRID_HPP
