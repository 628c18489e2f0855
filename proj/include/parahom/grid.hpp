#pragma once

#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "parahom/domain.hpp"
#include "parahom/integrand.hpp"
#include "parahom/mesh.hpp"

namespace parahom {

// ---------------------------------------------------------------------------
// Cell kY = (0,k)^n
// ---------------------------------------------------------------------------

/// Uniform grid on [0,k]^n with N cells per unit period (spacing 1/N).
class CellGrid {
 public:
  CellGrid(int n, int k, int nodes_per_period);

  int dim() const { return n_; }
  int period_multiple() const { return k_; }
  int nodes_per_period() const { return N_; }
  double spacing() const { return 1.0 / N_; }
  int nodes_per_axis() const { return k_ * N_ + 1; }
  const BoxMesh& mesh() const { return mesh_; }

  bool operator==(const CellGrid& other) const {
    return n_ == other.n_ && k_ == other.k_ && N_ == other.N_;
  }

 private:
  int n_, k_, N_;
  BoxMesh mesh_;
};

/// Nodal m-vector field on a CellGrid with zero trace on the boundary of [0,k]^n.
class CorrectorField {
 public:
  /// Zero corrector.
  CorrectorField(CellGrid grid, int m);
  /// Throws InvalidInput if any boundary node carries a nonzero value.
  CorrectorField(CellGrid grid, int m, std::vector<double> values);

  const CellGrid& grid() const { return grid_; }
  int components() const { return m_; }
  std::span<const double> values() const { return values_; }
  double value(Index node, int component) const { return values_[node * m_ + component]; }

  /// Throws InvalidInput when assigning a nonzero value to a boundary node.
  void set(Index node, int component, double value);

  /// Periodic extension of this corrector onto [0, factor*k]^n; zero trace
  /// on every tile boundary makes the result admissible.
  CorrectorField tiled(int factor) const;

  /// Multilinear interpolation at a point of [0,k]^n.
  void interpolate(std::span<const double> y, std::span<double> out) const;

  /// Mean over the cell of |phi|^p (midpoint rule).
  double mean_power(double p) const;

 private:
  CellGrid grid_;
  int m_;
  std::vector<double> values_;
};

// ---------------------------------------------------------------------------
// Space-time cylinder Omega x (0,T)
// ---------------------------------------------------------------------------

/// Structured grid over the bounding box of a domain; a cell is part of
/// Omega when its midpoint is. Time is split into `time_steps` equal slabs and
/// fields are sampled at slab midpoints.
class SpaceTimeGrid {
 public:
  SpaceTimeGrid(Domain domain, std::vector<int> cells_per_axis, double horizon, int time_steps);

  const Domain& domain() const { return domain_; }
  const BoxMesh& mesh() const { return mesh_; }
  int dim() const { return mesh_.dim(); }
  double horizon() const { return T_; }
  int time_steps() const { return M_; }
  double slab_width() const { return T_ / M_; }
  double time_level(int j) const { return (j + 0.5) * T_ / M_; }
  double max_spacing() const;

  bool cell_active(Index cell) const { return cell_active_[cell] != 0; }
  bool node_active(Index node) const { return node_active_[node] != 0; }
  /// Active node touching the complement of Omega (or the bounding box).
  bool node_on_boundary(Index node) const { return node_boundary_[node] != 0; }
  const std::vector<Index>& active_cells() const { return active_cells_; }
  /// Active nodes that are not on the boundary.
  const std::vector<Index>& interior_nodes() const { return interior_nodes_; }
  /// Total volume of active cells.
  double active_measure() const { return active_cells_.size() * mesh_.cell_volume(); }

 private:
  Domain domain_;
  BoxMesh mesh_;
  double T_;
  int M_;
  std::vector<char> cell_active_, node_active_, node_boundary_;
  std::vector<Index> active_cells_, interior_nodes_;
};

using GridPtr = std::shared_ptr<const SpaceTimeGrid>;

/// Nodal m-vector field per time level; inactive nodes hold zero.
class SpaceTimeField {
 public:
  SpaceTimeField(GridPtr grid, int m);
  /// Throws InvalidInput on non-finite values.
  SpaceTimeField(GridPtr grid, int m, std::vector<double> values);

  /// Samples fn(x, t, out) at every active node and time level.
  template <class Fn>
  static SpaceTimeField from_function(GridPtr grid, int m, Fn&& fn);

  const SpaceTimeGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  int components() const { return m_; }
  std::span<const double> level(int j) const;
  std::span<double> level(int j);
  std::span<const double> values() const { return values_; }

  SpaceTimeField operator-(const SpaceTimeField& other) const;
  SpaceTimeField scaled(double s) const;

 private:
  GridPtr grid_;
  int m_;
  std::vector<double> values_;
};

template <class Fn>
SpaceTimeField SpaceTimeField::from_function(GridPtr grid, int m, Fn&& fn) {
  SpaceTimeField field(grid, m);
  const auto& mesh = grid->mesh();
  std::vector<double> x(mesh.dim());
  for (int j = 0; j < grid->time_steps(); ++j) {
    auto lv = field.level(j);
    const double t = grid->time_level(j);
    for (Index node = 0; node < mesh.node_count(); ++node) {
      if (!grid->node_active(node)) continue;
      mesh.node_position(node, x);
      fn(std::span<const double>(x), t, lv.subspan(node * m, m));
    }
  }
  return field;
}

/// Gradient of the multilinear interpolant on one cell at one time level.
Matrix discrete_gradient(const SpaceTimeField& field, int level, Index cell);

/// Midpoint-rule (integral over Omega_T of |u|^p)^(1/p).
double lp_norm(const SpaceTimeField& field, double p);
/// lp_norm(a - b, p) without materializing the difference.
double lp_distance(const SpaceTimeField& a, const SpaceTimeField& b, double p);
/// Midpoint-rule (integral of |Du|^p)^(1/p), Frobenius norm on Du.
double gradient_lp_norm(const SpaceTimeField& field, double p);

/// CSV layout: header `axis0,...,axis{n-1},t,comp0,...,comp{m-1}`, one row per
/// active node and time level (time level outermost).
void write_field_csv(std::ostream& os, const SpaceTimeField& field);
SpaceTimeField read_field_csv(std::istream& is, GridPtr grid, int m);
/// Same layout for a corrector, with t fixed by the caller.
void write_corrector_csv(std::ostream& os, const CorrectorField& field, double t);

std::string field_csv_header(int n, int m);

}  // namespace parahom
