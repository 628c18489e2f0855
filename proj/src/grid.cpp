#include "parahom/grid.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "parahom/errors.hpp"
#include "parahom/util.hpp"

namespace parahom {

// ---------------------------------------------------------------------------
// CellGrid / CorrectorField
// ---------------------------------------------------------------------------

namespace {

BoxMesh make_cell_mesh(int n, int k, int N) {
  if (n < 1 || n > 3) throw InvalidInput("cell dimension must be 1, 2 or 3");
  if (k < 1) throw InvalidInput("period multiple k must be at least 1");
  if (N < 2) throw InvalidInput("nodes_per_period must be at least 2");
  return BoxMesh(std::vector<double>(n, 0.0), std::vector<double>(n, static_cast<double>(k)),
                 std::vector<int>(n, k * N));
}

}  // namespace

CellGrid::CellGrid(int n, int k, int nodes_per_period)
    : n_(n), k_(k), N_(nodes_per_period), mesh_(make_cell_mesh(n, k, nodes_per_period)) {}

CorrectorField::CorrectorField(CellGrid grid, int m)
    : grid_(std::move(grid)), m_(m), values_(grid_.mesh().node_count() * m, 0.0) {
  if (m < 1) throw InvalidInput("corrector needs at least one component");
}

CorrectorField::CorrectorField(CellGrid grid, int m, std::vector<double> values)
    : grid_(std::move(grid)), m_(m), values_(std::move(values)) {
  if (m < 1) throw InvalidInput("corrector needs at least one component");
  const auto& mesh = grid_.mesh();
  if (static_cast<Index>(values_.size()) != mesh.node_count() * m)
    throw DimensionMismatch("corrector value count does not match the grid");
  for (Index node = 0; node < mesh.node_count(); ++node) {
    for (int i = 0; i < m; ++i) {
      const double v = values_[node * m + i];
      if (!std::isfinite(v)) throw InvalidInput("corrector values must be finite");
      if (v != 0.0 && mesh.on_bounding_boundary(node))
        throw InvalidInput("corrector must vanish on the cell boundary");
    }
  }
}

void CorrectorField::set(Index node, int component, double value) {
  if (!std::isfinite(value)) throw InvalidInput("corrector values must be finite");
  if (value != 0.0 && grid_.mesh().on_bounding_boundary(node))
    throw InvalidInput("corrector must vanish on the cell boundary");
  values_[node * m_ + component] = value;
}

CorrectorField CorrectorField::tiled(int factor) const {
  if (factor < 1) throw InvalidInput("tiling factor must be at least 1");
  CellGrid big(grid_.dim(), grid_.period_multiple() * factor, grid_.nodes_per_period());
  const auto& src = grid_.mesh();
  const auto& dst = big.mesh();
  const int period_nodes = grid_.period_multiple() * grid_.nodes_per_period();
  std::vector<double> values(dst.node_count() * m_, 0.0);
  std::vector<int> multi(grid_.dim()), local(grid_.dim());
  for (Index node = 0; node < dst.node_count(); ++node) {
    dst.node_multi_index(node, multi);
    for (int a = 0; a < grid_.dim(); ++a) local[a] = multi[a] % period_nodes;
    const Index s = src.node_index(local);
    for (int i = 0; i < m_; ++i) values[node * m_ + i] = values_[s * m_ + i];
  }
  return CorrectorField(std::move(big), m_, std::move(values));
}

void CorrectorField::interpolate(std::span<const double> y, std::span<double> out) const {
  grid_.mesh().interpolate(values_, m_, y, out);
}

double CorrectorField::mean_power(double p) const {
  const auto& mesh = grid_.mesh();
  std::vector<double> mid(m_);
  double sum = 0.0;
  for (Index c = 0; c < mesh.cell_count(); ++c) {
    mesh.cell_mean(values_, m_, c, mid);
    double sq = 0.0;
    for (double v : mid) sq += v * v;
    sum += std::pow(std::sqrt(sq), p);
  }
  return sum / static_cast<double>(mesh.cell_count());
}

// ---------------------------------------------------------------------------
// SpaceTimeGrid
// ---------------------------------------------------------------------------

SpaceTimeGrid::SpaceTimeGrid(Domain domain, std::vector<int> cells_per_axis, double horizon,
                             int time_steps)
    : domain_(std::move(domain)), T_(horizon), M_(time_steps) {
  if (!(T_ > 0.0) || !std::isfinite(T_)) throw InvalidInput("time horizon T must be positive");
  if (M_ < 1) throw InvalidInput("time_steps must be at least 1");
  if (static_cast<int>(cells_per_axis.size()) != domain_.dim())
    throw DimensionMismatch("resolution does not match domain dimension");
  const Box bb = domain_.bounding_box();
  mesh_ = BoxMesh(bb.lower, bb.upper, std::move(cells_per_axis));

  const int n = mesh_.dim();
  cell_active_.assign(mesh_.cell_count(), 0);
  std::vector<double> mid(n);
  for (Index c = 0; c < mesh_.cell_count(); ++c) {
    mesh_.cell_midpoint(c, mid);
    if (domain_.contains(mid)) {
      cell_active_[c] = 1;
      active_cells_.push_back(c);
    }
  }
  if (active_cells_.empty()) throw InvalidInput("grid resolves no cell inside the domain");

  std::vector<int> touch(mesh_.node_count(), 0);
  std::vector<Index> corners(mesh_.corners_per_cell());
  for (Index c : active_cells_) {
    mesh_.cell_corners(c, corners);
    for (Index node : corners) ++touch[node];
  }
  node_active_.assign(mesh_.node_count(), 0);
  node_boundary_.assign(mesh_.node_count(), 0);
  const int full = mesh_.corners_per_cell();
  for (Index node = 0; node < mesh_.node_count(); ++node) {
    if (touch[node] == 0) continue;
    node_active_[node] = 1;
    if (touch[node] < full) {
      node_boundary_[node] = 1;
    } else {
      interior_nodes_.push_back(node);
    }
  }
}

double SpaceTimeGrid::max_spacing() const {
  double h = 0.0;
  for (int a = 0; a < mesh_.dim(); ++a) h = std::max(h, mesh_.spacing(a));
  return h;
}

// ---------------------------------------------------------------------------
// SpaceTimeField
// ---------------------------------------------------------------------------

SpaceTimeField::SpaceTimeField(GridPtr grid, int m)
    : grid_(std::move(grid)), m_(m),
      values_(grid_->mesh().node_count() * m * grid_->time_steps(), 0.0) {
  if (m < 1) throw InvalidInput("field needs at least one component");
}

SpaceTimeField::SpaceTimeField(GridPtr grid, int m, std::vector<double> values)
    : grid_(std::move(grid)), m_(m), values_(std::move(values)) {
  if (m < 1) throw InvalidInput("field needs at least one component");
  if (static_cast<Index>(values_.size()) != grid_->mesh().node_count() * m * grid_->time_steps())
    throw DimensionMismatch("field value count does not match the grid");
  for (double v : values_)
    if (!std::isfinite(v)) throw InvalidInput("field values must be finite");
}

std::span<const double> SpaceTimeField::level(int j) const {
  const std::size_t stride = grid_->mesh().node_count() * m_;
  return std::span<const double>(values_).subspan(j * stride, stride);
}

std::span<double> SpaceTimeField::level(int j) {
  const std::size_t stride = grid_->mesh().node_count() * m_;
  return std::span<double>(values_).subspan(j * stride, stride);
}

SpaceTimeField SpaceTimeField::operator-(const SpaceTimeField& other) const {
  if (grid_ != other.grid_ || m_ != other.m_)
    throw DimensionMismatch("fields live on different grids");
  std::vector<double> diff(values_.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = values_[i] - other.values_[i];
  return SpaceTimeField(grid_, m_, std::move(diff));
}

SpaceTimeField SpaceTimeField::scaled(double s) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= s;
  return SpaceTimeField(grid_, m_, std::move(v));
}

// ---------------------------------------------------------------------------
// Discrete operators
// ---------------------------------------------------------------------------

Matrix discrete_gradient(const SpaceTimeField& field, int level, Index cell) {
  Matrix g;
  field.grid().mesh().cell_gradient(field.level(level), field.components(), cell, g);
  return g;
}

namespace {

double power(double abs_value, double p) {
  return p == 2.0 ? abs_value * abs_value : std::pow(abs_value, p);
}

template <class CellValue>
double integrate_cells(const SpaceTimeGrid& grid, CellValue&& cell_value) {
  double total = 0.0;
  for (int j = 0; j < grid.time_steps(); ++j) {
    double slab = 0.0;
    for (Index c : grid.active_cells()) slab += cell_value(j, c);
    total += slab * grid.mesh().cell_volume() * grid.slab_width();
  }
  return total;
}

}  // namespace

double lp_norm(const SpaceTimeField& field, double p) {
  if (!(p >= 1.0)) throw InvalidInput("L^p norm needs p >= 1");
  const auto& mesh = field.grid().mesh();
  const int m = field.components();
  std::vector<double> mid(m);
  const double integral = integrate_cells(field.grid(), [&](int j, Index c) {
    mesh.cell_mean(field.level(j), m, c, mid);
    double sq = 0.0;
    for (double v : mid) sq += v * v;
    return power(std::sqrt(sq), p);
  });
  return std::pow(integral, 1.0 / p);
}

double lp_distance(const SpaceTimeField& a, const SpaceTimeField& b, double p) {
  return lp_norm(a - b, p);
}

double gradient_lp_norm(const SpaceTimeField& field, double p) {
  if (!(p >= 1.0)) throw InvalidInput("L^p norm needs p >= 1");
  const auto& mesh = field.grid().mesh();
  Matrix g;
  const double integral = integrate_cells(field.grid(), [&](int j, Index c) {
    mesh.cell_gradient(field.level(j), field.components(), c, g);
    return power(g.norm(), p);
  });
  return std::pow(integral, 1.0 / p);
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

std::string field_csv_header(int n, int m) {
  std::string h;
  for (int a = 0; a < n; ++a) h += "axis" + std::to_string(a) + ",";
  h += "t";
  for (int i = 0; i < m; ++i) h += ",comp" + std::to_string(i);
  return h;
}

void write_field_csv(std::ostream& os, const SpaceTimeField& field) {
  const auto& grid = field.grid();
  const auto& mesh = grid.mesh();
  const int m = field.components();
  os << field_csv_header(mesh.dim(), m) << "\n";
  std::vector<double> x(mesh.dim());
  for (int j = 0; j < grid.time_steps(); ++j) {
    const auto lv = field.level(j);
    const std::string t = format_double(grid.time_level(j));
    for (Index node = 0; node < mesh.node_count(); ++node) {
      if (!grid.node_active(node)) continue;
      mesh.node_position(node, x);
      for (double v : x) os << format_double(v) << ",";
      os << t;
      for (int i = 0; i < m; ++i) os << "," << format_double(lv[node * m + i]);
      os << "\n";
    }
  }
}

SpaceTimeField read_field_csv(std::istream& is, GridPtr grid, int m) {
  const auto& mesh = grid->mesh();
  std::string line;
  if (!std::getline(is, line) || line != field_csv_header(mesh.dim(), m))
    throw InvalidInput("field CSV header does not match the grid layout");
  SpaceTimeField field(grid, m);
  std::vector<double> x(mesh.dim());
  for (int j = 0; j < grid->time_steps(); ++j) {
    auto lv = field.level(j);
    for (Index node = 0; node < mesh.node_count(); ++node) {
      if (!grid->node_active(node)) continue;
      if (!std::getline(is, line)) throw InvalidInput("field CSV ended early");
      std::stringstream row(line);
      std::string cell;
      std::vector<double> cols;
      while (std::getline(row, cell, ',')) cols.push_back(std::stod(cell));
      if (static_cast<int>(cols.size()) != mesh.dim() + 1 + m)
        throw InvalidInput("field CSV row has the wrong column count");
      mesh.node_position(node, x);
      for (int a = 0; a < mesh.dim(); ++a)
        if (std::abs(cols[a] - x[a]) > 1e-12 * (1.0 + std::abs(x[a])))
          throw InvalidInput("field CSV node coordinates do not match the grid");
      for (int i = 0; i < m; ++i) lv[node * m + i] = cols[mesh.dim() + 1 + i];
    }
  }
  return field;
}

void write_corrector_csv(std::ostream& os, const CorrectorField& field, double t) {
  const auto& mesh = field.grid().mesh();
  const int m = field.components();
  os << field_csv_header(mesh.dim(), m) << "\n";
  std::vector<double> x(mesh.dim());
  const std::string ts = format_double(t);
  for (Index node = 0; node < mesh.node_count(); ++node) {
    mesh.node_position(node, x);
    for (double v : x) os << format_double(v) << ",";
    os << ts;
    for (int i = 0; i < m; ++i) os << "," << format_double(field.value(node, i));
    os << "\n";
  }
}

}  // namespace parahom
