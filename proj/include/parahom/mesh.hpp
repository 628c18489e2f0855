#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "parahom/integrand.hpp"

namespace parahom {

using Index = std::int64_t;

/// Uniform tensor-product grid of axis-aligned cells. Nodes and cells are
/// numbered lexicographically with axis 0 running fastest.
class BoxMesh {
 public:
  BoxMesh() = default;
  BoxMesh(std::vector<double> lower, std::vector<double> upper, std::vector<int> cells);

  int dim() const { return static_cast<int>(cells_.size()); }
  int cells_along(int axis) const { return cells_[axis]; }
  int nodes_along(int axis) const { return cells_[axis] + 1; }
  Index cell_count() const { return cell_count_; }
  Index node_count() const { return node_count_; }
  double spacing(int axis) const { return spacing_[axis]; }
  double lower(int axis) const { return lower_[axis]; }
  double upper(int axis) const { return upper_[axis]; }
  double cell_volume() const { return cell_volume_; }

  /// Node coordinate along one axis; the last node sits exactly on `upper`.
  double coordinate(int axis, int i) const {
    return lower_[axis] + (upper_[axis] - lower_[axis]) * (static_cast<double>(i) / cells_[axis]);
  }

  void node_multi_index(Index node, std::span<int> out) const;
  void cell_multi_index(Index cell, std::span<int> out) const;
  Index node_index(std::span<const int> multi) const;
  Index cell_index(std::span<const int> multi) const;

  void node_position(Index node, std::span<double> out) const;
  void cell_midpoint(Index cell, std::span<double> out) const;

  /// Node indices of the 2^n corners of a cell; bit j of the corner id selects
  /// the upper node along axis j.
  void cell_corners(Index cell, std::span<Index> out) const;
  int corners_per_cell() const { return 1 << dim(); }

  bool on_bounding_boundary(Index node) const;

  /// Per-cell gradient of the multilinear interpolant of an m-vector nodal
  /// field (`values[node * m + i]`): edge difference quotients averaged over
  /// the 2^(n-1) edges parallel to each axis.
  void cell_gradient(std::span<const double> values, int m, Index cell, Matrix& out) const;

  /// Average of the corner values (interpolant at the cell midpoint).
  void cell_mean(std::span<const double> values, int m, Index cell, std::span<double> out) const;

  /// Coefficient of corner value `corner` in the (i, axis) entry of the cell gradient.
  double gradient_weight(int corner, int axis) const {
    const double sign = (corner >> axis) & 1 ? 1.0 : -1.0;
    return sign * edge_scale_[axis];
  }

  /// Multilinear interpolation of a nodal field at an arbitrary point of the box.
  void interpolate(std::span<const double> values, int m, std::span<const double> point,
                   std::span<double> out) const;

 private:
  std::vector<double> lower_, upper_, spacing_, edge_scale_;
  std::vector<int> cells_;
  std::vector<Index> node_stride_, cell_stride_, corner_offset_;
  Index cell_count_ = 0, node_count_ = 0;
  double cell_volume_ = 0.0;
};

}  // namespace parahom
