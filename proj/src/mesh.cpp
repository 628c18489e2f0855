#include "parahom/mesh.hpp"

#include <algorithm>

#include "parahom/errors.hpp"

namespace parahom {

BoxMesh::BoxMesh(std::vector<double> lower, std::vector<double> upper, std::vector<int> cells)
    : lower_(std::move(lower)), upper_(std::move(upper)), cells_(std::move(cells)) {
  const int n = dim();
  if (n < 1 || n > 3) throw InvalidInput("mesh supports one to three axes");
  if (static_cast<int>(lower_.size()) != n || static_cast<int>(upper_.size()) != n)
    throw DimensionMismatch("mesh bounds do not match the number of axes");
  spacing_.resize(n);
  edge_scale_.resize(n);
  node_stride_.resize(n);
  cell_stride_.resize(n);
  cell_volume_ = 1.0;
  Index node_stride = 1, cell_stride = 1;
  for (int a = 0; a < n; ++a) {
    if (cells_[a] < 1) throw InvalidInput("mesh needs at least one cell per axis");
    if (!(upper_[a] > lower_[a])) throw InvalidInput("mesh cells must have positive volume");
    spacing_[a] = (upper_[a] - lower_[a]) / cells_[a];
    edge_scale_[a] = 1.0 / (spacing_[a] * static_cast<double>(1 << (n - 1)));
    cell_volume_ *= spacing_[a];
    node_stride_[a] = node_stride;
    cell_stride_[a] = cell_stride;
    node_stride *= cells_[a] + 1;
    cell_stride *= cells_[a];
  }
  node_count_ = node_stride;
  cell_count_ = cell_stride;
  corner_offset_.resize(std::size_t{1} << n);
  for (int c = 0; c < (1 << n); ++c) {
    Index off = 0;
    for (int a = 0; a < n; ++a)
      if ((c >> a) & 1) off += node_stride_[a];
    corner_offset_[c] = off;
  }
}

void BoxMesh::node_multi_index(Index node, std::span<int> out) const {
  for (int a = 0; a < dim(); ++a) {
    out[a] = static_cast<int>(node % (cells_[a] + 1));
    node /= cells_[a] + 1;
  }
}

void BoxMesh::cell_multi_index(Index cell, std::span<int> out) const {
  for (int a = 0; a < dim(); ++a) {
    out[a] = static_cast<int>(cell % cells_[a]);
    cell /= cells_[a];
  }
}

Index BoxMesh::node_index(std::span<const int> multi) const {
  Index idx = 0;
  for (int a = 0; a < dim(); ++a) idx += multi[a] * node_stride_[a];
  return idx;
}

Index BoxMesh::cell_index(std::span<const int> multi) const {
  Index idx = 0;
  for (int a = 0; a < dim(); ++a) idx += multi[a] * cell_stride_[a];
  return idx;
}

void BoxMesh::node_position(Index node, std::span<double> out) const {
  for (int a = 0; a < dim(); ++a) {
    const int i = static_cast<int>(node % (cells_[a] + 1));
    node /= cells_[a] + 1;
    out[a] = coordinate(a, i);
  }
}

void BoxMesh::cell_midpoint(Index cell, std::span<double> out) const {
  for (int a = 0; a < dim(); ++a) {
    const int i = static_cast<int>(cell % cells_[a]);
    cell /= cells_[a];
    out[a] = 0.5 * (coordinate(a, i) + coordinate(a, i + 1));
  }
}

void BoxMesh::cell_corners(Index cell, std::span<Index> out) const {
  Index base = 0;
  for (int a = 0; a < dim(); ++a) {
    base += (cell % cells_[a]) * node_stride_[a];
    cell /= cells_[a];
  }
  for (std::size_t c = 0; c < corner_offset_.size(); ++c) out[c] = base + corner_offset_[c];
}

bool BoxMesh::on_bounding_boundary(Index node) const {
  for (int a = 0; a < dim(); ++a) {
    const Index i = node % (cells_[a] + 1);
    node /= cells_[a] + 1;
    if (i == 0 || i == cells_[a]) return true;
  }
  return false;
}

void BoxMesh::cell_gradient(std::span<const double> values, int m, Index cell,
                            Matrix& out) const {
  const int n = dim();
  out.setZero(m, n);
  Index corners[8];
  cell_corners(cell, std::span<Index>(corners, corners_per_cell()));
  for (int c = 0; c < corners_per_cell(); ++c) {
    const double* v = values.data() + corners[c] * m;
    for (int a = 0; a < n; ++a) {
      const double w = gradient_weight(c, a);
      for (int i = 0; i < m; ++i) out(i, a) += w * v[i];
    }
  }
}

void BoxMesh::cell_mean(std::span<const double> values, int m, Index cell,
                        std::span<double> out) const {
  Index corners[8];
  const int nc = corners_per_cell();
  cell_corners(cell, std::span<Index>(corners, nc));
  std::fill(out.begin(), out.begin() + m, 0.0);
  for (int c = 0; c < nc; ++c)
    for (int i = 0; i < m; ++i) out[i] += values[corners[c] * m + i];
  for (int i = 0; i < m; ++i) out[i] /= nc;
}

void BoxMesh::interpolate(std::span<const double> values, int m, std::span<const double> point,
                          std::span<double> out) const {
  const int n = dim();
  int base[3];
  double frac[3];
  for (int a = 0; a < n; ++a) {
    double s = (point[a] - lower_[a]) / spacing_[a];
    s = std::clamp(s, 0.0, static_cast<double>(cells_[a]));
    int i = static_cast<int>(std::floor(s));
    if (i >= cells_[a]) i = cells_[a] - 1;
    base[a] = i;
    frac[a] = s - i;
  }
  std::fill(out.begin(), out.begin() + m, 0.0);
  const Index origin = node_index(std::span<const int>(base, n));
  for (int c = 0; c < (1 << n); ++c) {
    double w = 1.0;
    for (int a = 0; a < n; ++a) w *= ((c >> a) & 1) ? frac[a] : 1.0 - frac[a];
    if (w == 0.0) continue;
    const double* v = values.data() + (origin + corner_offset_[c]) * m;
    for (int i = 0; i < m; ++i) out[i] += w * v[i];
  }
}

}  // namespace parahom
