#include "parahom/functional.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "parahom/errors.hpp"
#include "parahom/util.hpp"

namespace parahom {

// ---------------------------------------------------------------------------
// Affine data
// ---------------------------------------------------------------------------

AffineData AffineData::constant(const Matrix& slope, const Vector& offset, int levels) {
  if (levels < 1) throw InvalidInput("affine data needs at least one time level");
  AffineData d;
  d.slopes.assign(levels, slope);
  d.offsets.assign(levels, offset);
  d.validate();
  return d;
}

void AffineData::validate() const {
  if (slopes.empty()) throw InvalidInput("affine data has no time levels");
  if (slopes.size() != offsets.size())
    throw DimensionMismatch("affine slopes and offsets differ in length");
  for (std::size_t j = 0; j < slopes.size(); ++j) {
    if (slopes[j].rows() != slopes[0].rows() || slopes[j].cols() != slopes[0].cols() ||
        offsets[j].size() != slopes[0].rows())
      throw DimensionMismatch("affine data dimensions vary across time levels");
    if (!slopes[j].allFinite() || !offsets[j].allFinite())
      throw InvalidInput("affine data must be finite");
  }
}

void AffineData::evaluate(int level, std::span<const double> x, std::span<double> out) const {
  const Matrix& L = slopes[level];
  for (int i = 0; i < L.rows(); ++i) {
    double v = offsets[level][i];
    for (int a = 0; a < L.cols(); ++a) v += L(i, a) * x[a];
    out[i] = v;
  }
}

SpaceTimeField affine_field(const GridPtr& grid, const AffineData& data) {
  data.validate();
  if (data.levels() != grid->time_steps())
    throw DimensionMismatch("affine data levels do not match the time grid");
  if (data.cols() != grid->dim()) throw DimensionMismatch("affine slope has the wrong width");
  const double T = grid->horizon();
  const int M = grid->time_steps();
  return SpaceTimeField::from_function(
      grid, data.rows(), [&](std::span<const double> x, double t, std::span<double> out) {
        const int level = std::clamp(static_cast<int>(std::floor(t / T * M)), 0, M - 1);
        data.evaluate(level, x, out);
      });
}

// ---------------------------------------------------------------------------
// Functionals
// ---------------------------------------------------------------------------

double admissible_spacing(double eps, int cells_per_period) {
  return eps / (4.0 * cells_per_period);
}

void check_resolution(const SpaceTimeGrid& grid, double eps, int cells_per_period) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidInput("eps must be positive");
  const double limit = admissible_spacing(eps, cells_per_period);
  if (grid.max_spacing() > limit * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "grid spacing " << format_double(grid.max_spacing()) << " does not resolve eps "
       << format_double(eps) << "; spacing must be at most " << format_double(limit);
    throw ResolutionError(os.str(), limit);
  }
}

namespace {

void scaled_midpoint(const BoxMesh& mesh, Index cell, double eps, std::span<double> y) {
  mesh.cell_midpoint(cell, y);
  for (double& v : y) v /= eps;
}

}  // namespace

double evaluate_oscillatory(const IntegrandSpec& spec, double eps, const SpaceTimeField& u,
                            const std::optional<Domain>& region) {
  spec.validate();
  const auto& grid = u.grid();
  if (grid.dim() != spec.n || u.components() != spec.m)
    throw DimensionMismatch("field does not match the integrand dimensions");
  check_resolution(grid, eps, spec.cells_per_period);
  const auto& mesh = grid.mesh();
  std::vector<double> mid(spec.n), y(spec.n);
  Matrix G;
  double total = 0.0;
  for (int j = 0; j < grid.time_steps(); ++j) {
    const double t = grid.time_level(j);
    double slab = 0.0;
    for (Index c : grid.active_cells()) {
      if (region) {
        mesh.cell_midpoint(c, mid);
        if (!region->contains(mid)) continue;
      }
      mesh.cell_gradient(u.level(j), spec.m, c, G);
      scaled_midpoint(mesh, c, eps, y);
      slab += evaluate(spec, y, t, G);
    }
    total += slab * (mesh.cell_volume() * grid.slab_width());
  }
  return total;
}

HomogenizedValue evaluate_homogenized(const DensityTable& table, const SpaceTimeField& u) {
  const auto& grid = u.grid();
  const auto& g = table.lambda_grid;
  if (g.rows() != u.components() || g.cols() != grid.dim())
    throw DimensionMismatch("table dimensions do not match the field");
  const auto& mesh = grid.mesh();
  Matrix G;
  HomogenizedValue out;
  for (int j = 0; j < grid.time_steps(); ++j) {
    const double t = grid.time_level(j);
    double slab = 0.0;
    for (Index c : grid.active_cells()) {
      mesh.cell_gradient(u.level(j), u.components(), c, G);
      const auto lookup = table.interpolate(t, G);
      slab += lookup.value;
      out.touches_nonstationary = out.touches_nonstationary || lookup.touches_nonstationary;
    }
    out.value += slab * (mesh.cell_volume() * grid.slab_width());
  }
  if (out.touches_nonstationary)
    out.warnings.push_back("interpolation used table entries flagged non-stationary");
  return out;
}

// ---------------------------------------------------------------------------
// Recovery sequences
// ---------------------------------------------------------------------------

void RecoverySequenceSpec::validate() const {
  base.validate();
  if (correctors.empty()) throw InvalidInput("recovery sequence needs a corrector");
  const auto& first = correctors.front();
  if (correctors.size() != 1 && static_cast<int>(correctors.size()) != base.levels())
    throw DimensionMismatch("need one corrector or one per time level");
  for (const auto& c : correctors) {
    if (!(c.grid() == first.grid()) || c.components() != first.components())
      throw DimensionMismatch("per-level correctors must share one cell grid");
  }
  if (first.components() != base.rows() || first.grid().dim() != base.cols())
    throw DimensionMismatch("corrector does not match the affine base");
  if (delta < 0.0) throw InvalidInput("delta must be nonnegative");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0)) throw InvalidInput("eps values must be positive");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1]))
      throw InvalidInput("eps values must be strictly decreasing");
  }
  if (cells_per_period < 1) throw InvalidInput("cells_per_period must be positive");
}

const CorrectorField& RecoverySequenceSpec::corrector(int level) const {
  return correctors.size() == 1 ? correctors.front() : correctors[level];
}

SpaceTimeField build_recovery(const RecoverySequenceSpec& rs, double eps, const GridPtr& grid) {
  rs.validate();
  check_resolution(*grid, eps, rs.cells_per_period);
  const int k = rs.period_multiple();
  const double eta = eps * k;
  const Tiling tiling = tile_interior(grid->domain(), eta);
  SpaceTimeField field = affine_field(grid, rs.base);
  if (tiling.size() == 0) return field;

  const auto& mesh = grid->mesh();
  const int n = grid->dim();
  const int m = rs.base.rows();
  std::vector<double> x(n), y(n), phi(m);
  std::vector<int> tile(n);
  for (Index node = 0; node < mesh.node_count(); ++node) {
    if (!grid->node_active(node) || grid->node_on_boundary(node)) continue;
    mesh.node_position(node, x);
    bool on_plane = false;
    for (int a = 0; a < n; ++a) {
      const double z = x[a] / eta;
      if (std::abs(z - std::round(z)) <= 1e-9) on_plane = true;
      tile[a] = static_cast<int>(std::floor(z));
    }
    // Correctors vanish on tile faces, so lattice-plane nodes keep the base.
    if (on_plane || !tiling.contains_tile(tile)) continue;
    for (int a = 0; a < n; ++a) y[a] = std::clamp(x[a] / eps - tile[a] * k, 0.0, double(k));
    for (int j = 0; j < grid->time_steps(); ++j) {
      rs.corrector(j).interpolate(y, phi);
      auto lv = field.level(j);
      for (int i = 0; i < m; ++i) lv[node * m + i] += eps * phi[i];
    }
  }
  return field;
}

std::vector<GammaRow> recovery_convergence(const IntegrandSpec& spec,
                                           const RecoverySequenceSpec& rs,
                                           const GridFactory& grid_factory,
                                           const DensityTable& table, double p_norm,
                                           unsigned threads) {
  rs.validate();
  const double p = p_norm > 0.0 ? p_norm : spec.p;
  std::vector<GammaRow> rows(rs.eps_list.size());
  parallel_for(rows.size(), threads, [&](std::size_t i) {
    const double eps = rs.eps_list[i];
    const GridPtr grid = grid_factory(eps);
    const SpaceTimeField u = build_recovery(rs, eps, grid);
    const SpaceTimeField base = affine_field(grid, rs.base);
    GammaRow& row = rows[i];
    row.eps = eps;
    row.F_eps = evaluate_oscillatory(spec, eps, u);
    row.F_limit = evaluate_homogenized(table, base).value;
    row.abs_gap = std::abs(row.F_eps - row.F_limit);
    row.lp_distance = lp_distance(u, base, p);
    row.grad_lp_bound = gradient_lp_norm(u, p);
  });
  for (std::size_t i = 1; i < rows.size(); ++i)
    rows[i].grad_lp_bound = std::max(rows[i].grad_lp_bound, rows[i - 1].grad_lp_bound);
  return rows;
}

std::string gamma_csv_header() { return "eps,F_eps,F_limit,abs_gap,lp_distance,grad_lp_bound"; }

void write_gamma_csv(std::ostream& os, const std::vector<GammaRow>& rows) {
  os << gamma_csv_header() << "\n";
  for (const auto& r : rows)
    os << format_double(r.eps) << "," << format_double(r.F_eps) << "," << format_double(r.F_limit)
       << "," << format_double(r.abs_gap) << "," << format_double(r.lp_distance) << ","
       << format_double(r.grad_lp_bound) << "\n";
}

// ---------------------------------------------------------------------------
// Layered affine functions
// ---------------------------------------------------------------------------

namespace {

constexpr double kPieceTol = 1e-10;

}  // namespace

int LayeredAffine::piece_of(std::span<const double> x) const {
  for (std::size_t i = 0; i < pieces.size(); ++i)
    if (pieces[i].box.contains(x, kPieceTol)) return static_cast<int>(i);
  return -1;
}

void LayeredAffine::evaluate(int level, std::span<const double> x, std::span<double> out) const {
  const int i = piece_of(x);
  if (i < 0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const auto& piece = pieces[i];
  const Vector v = piece.slopes[level] * Eigen::Map<const Vector>(x.data(), x.size()) +
                   piece.offsets[level];
  for (int c = 0; c < m; ++c) out[c] = v[c];
}

SpaceTimeField LayeredAffine::render(const GridPtr& grid) const {
  const double T = grid->horizon();
  const int M = grid->time_steps();
  for (const auto& piece : pieces)
    if (static_cast<int>(piece.slopes.size()) != M)
      throw DimensionMismatch("layered pieces do not match the time grid");
  return SpaceTimeField::from_function(
      grid, m, [&](std::span<const double> x, double t, std::span<double> out) {
        const int level = std::clamp(static_cast<int>(std::floor(t / T * M)), 0, M - 1);
        evaluate(level, x, out);
      });
}

LayeredProjection layered_project(const SpaceTimeField& u, const std::vector<Box>& partition,
                                  double p) {
  if (!(p >= 1.0)) throw InvalidInput("L^p error needs p >= 1");
  if (partition.empty()) throw InvalidInput("partition must not be empty");
  const auto& grid = u.grid();
  const auto& mesh = grid.mesh();
  const int n = grid.dim();
  const int m = u.components();
  const int M = grid.time_steps();

  LayeredProjection out;
  out.layered.m = m;
  std::vector<double> x(n);
  for (const Box& box : partition) {
    if (box.dim() != n || static_cast<int>(box.upper.size()) != n)
      throw DimensionMismatch("partition box has the wrong dimension");
    std::vector<Index> nodes;
    for (Index node = 0; node < mesh.node_count(); ++node) {
      if (!grid.node_active(node)) continue;
      mesh.node_position(node, x);
      if (box.contains(x, kPieceTol)) nodes.push_back(node);
    }
    if (static_cast<int>(nodes.size()) < n + 1)
      throw UnderdeterminedFit("partition piece holds fewer than n+1 grid nodes");
    Matrix A(static_cast<Index>(nodes.size()), n + 1);
    for (std::size_t r = 0; r < nodes.size(); ++r) {
      mesh.node_position(nodes[r], x);
      for (int a = 0; a < n; ++a) A(r, a) = x[a];
      A(r, n) = 1.0;
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(A);
    if (qr.rank() < n + 1) throw UnderdeterminedFit("partition piece nodes are affinely degenerate");

    LayeredPiece piece{box, {}, {}};
    Matrix B(A.rows(), m);
    for (int j = 0; j < M; ++j) {
      const auto lv = u.level(j);
      for (std::size_t r = 0; r < nodes.size(); ++r)
        for (int i = 0; i < m; ++i) B(r, i) = lv[nodes[r] * m + i];
      const Matrix X = qr.solve(B);
      piece.slopes.push_back(X.topRows(n).transpose());
      piece.offsets.push_back(X.row(n).transpose());
    }
    out.layered.pieces.push_back(std::move(piece));
  }

  std::vector<double> mid(n), um(m), lm(m);
  double total = 0.0;
  for (int j = 0; j < M; ++j) {
    double slab = 0.0;
    for (Index c : grid.active_cells()) {
      mesh.cell_midpoint(c, mid);
      mesh.cell_mean(u.level(j), m, c, um);
      out.layered.evaluate(j, mid, lm);
      double sq = 0.0;
      for (int i = 0; i < m; ++i) sq += (um[i] - lm[i]) * (um[i] - lm[i]);
      slab += std::pow(std::sqrt(sq), p);
    }
    total += slab * (mesh.cell_volume() * grid.slab_width());
  }
  out.error = std::pow(total, 1.0 / p);
  return out;
}

std::vector<Box> refine_partition(const std::vector<Box>& partition) {
  std::vector<Box> out;
  for (const Box& box : partition) {
    const int n = box.dim();
    for (int code = 0; code < (1 << n); ++code) {
      Box child = box;
      for (int a = 0; a < n; ++a) {
        const double mid = 0.5 * (box.lower[a] + box.upper[a]);
        if ((code >> a) & 1)
          child.lower[a] = mid;
        else
          child.upper[a] = mid;
      }
      out.push_back(std::move(child));
    }
  }
  return out;
}

}  // namespace parahom
