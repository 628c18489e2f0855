#pragma once

#include <span>
#include <vector>

namespace parahom {

/// Closed axis-aligned box [lower, upper].
struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  int dim() const { return static_cast<int>(lower.size()); }
  double volume() const;
  bool contains(std::span<const double> point, double tol = 0.0) const;
};

/// Closed ball removed from the domain.
struct Ball {
  std::vector<double> center;
  double radius = 0.0;
};

/// Spatial domain: a finite union of boxes with finitely many closed balls
/// removed. Every such set has a Lebesgue-null boundary.
class Domain {
 public:
  Domain() = default;
  explicit Domain(std::vector<Box> boxes, std::vector<Ball> holes = {});

  /// The unit cube (0,1)^n.
  static Domain unit_cube(int n);
  static Domain box(std::vector<double> lower, std::vector<double> upper);

  int dim() const { return dim_; }
  const std::vector<Box>& boxes() const { return boxes_; }
  const std::vector<Ball>& holes() const { return holes_; }

  bool contains(std::span<const double> point) const;
  /// True when the closed cube [lower, lower + side]^n lies inside the domain.
  bool contains_cube(std::span<const double> lower, double side) const;
  double measure() const;
  Box bounding_box() const;

  /// L^n(boundary) = 0 holds for every representable domain.
  bool boundary_is_null() const { return true; }

 private:
  double union_volume_within(const Box& clip) const;

  int dim_ = 0;
  std::vector<Box> boxes_;
  std::vector<Ball> holes_;
  double measure_ = 0.0;
};

/// Closed eta-cubes of the lattice eta Z^n that fit inside a domain.
struct Tiling {
  double eta = 0.0;
  int dim = 0;
  /// Lattice multi-indices, `dim` ints per tile; tile i covers
  /// [eta * idx, eta * (idx + 1)] along every axis.
  std::vector<int> indices;
  double tiled_measure = 0.0;
  double remainder_measure = 0.0;

  std::size_t size() const { return dim == 0 ? 0 : indices.size() / dim; }
  std::span<const int> tile(std::size_t i) const {
    return std::span<const int>(indices).subspan(i * dim, dim);
  }
  /// Binary search over the (sorted) index list.
  bool contains_tile(std::span<const int> multi) const;
};

Tiling tile_interior(const Domain& omega, double eta);

}  // namespace parahom
