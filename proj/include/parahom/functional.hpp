#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "parahom/cell.hpp"
#include "parahom/domain.hpp"
#include "parahom/grid.hpp"

namespace parahom {

/// u(x, t) = lambda(t) x + a(t) with lambda, a piecewise constant on the
/// time levels of a space-time grid.
struct AffineData {
  std::vector<Matrix> slopes;
  std::vector<Vector> offsets;

  static AffineData constant(const Matrix& slope, const Vector& offset, int levels);
  int levels() const { return static_cast<int>(slopes.size()); }
  int rows() const { return slopes.empty() ? 0 : static_cast<int>(slopes.front().rows()); }
  int cols() const { return slopes.empty() ? 0 : static_cast<int>(slopes.front().cols()); }
  void validate() const;
  void evaluate(int level, std::span<const double> x, std::span<double> out) const;
};

SpaceTimeField affine_field(const GridPtr& grid, const AffineData& data);

/// Throws ResolutionError unless the largest spatial spacing is at most
/// eps / (4 cells_per_period).
void check_resolution(const SpaceTimeGrid& grid, double eps, int cells_per_period);
double admissible_spacing(double eps, int cells_per_period);

/// F^eps(u) = integral over Omega_T of f(x/eps, t, Du) by midpoint quadrature.
/// With `region`, only active cells whose midpoint lies in it contribute.
double evaluate_oscillatory(const IntegrandSpec& spec, double eps, const SpaceTimeField& u,
                            const std::optional<Domain>& region = std::nullopt);

struct HomogenizedValue {
  double value = 0.0;
  bool touches_nonstationary = false;
  std::vector<std::string> warnings;
};

/// F(u) = integral over Omega_T of f_bar(t, Du) using table interpolation.
/// Throws ExtrapolationError when Du leaves the tabulated range.
HomogenizedValue evaluate_homogenized(const DensityTable& table, const SpaceTimeField& u);

// ---------------------------------------------------------------------------
// Recovery sequences
// ---------------------------------------------------------------------------

struct RecoverySequenceSpec {
  AffineData base;
  /// One corrector shared by every time level, or one per level.
  std::vector<CorrectorField> correctors;
  /// Target gap of the supplied corrector (informational).
  double delta = 0.0;
  std::vector<double> eps_list;
  int cells_per_period = 8;

  void validate() const;
  const CorrectorField& corrector(int level) const;
  int period_multiple() const { return correctors.front().grid().period_multiple(); }
};

/// Affine base plus eps phi(x / eps) on the (eps k)-tiled interior and the
/// plain base elsewhere.
SpaceTimeField build_recovery(const RecoverySequenceSpec& rs, double eps, const GridPtr& grid);

struct GammaRow {
  double eps = 0.0;
  double F_eps = 0.0;
  double F_limit = 0.0;
  double abs_gap = 0.0;
  double lp_distance = 0.0;
  /// Running maximum of the gradient L^p norm over the rows so far.
  double grad_lp_bound = 0.0;
};

using GridFactory = std::function<GridPtr(double eps)>;

/// One row per eps (in the given, decreasing order). F_limit is the
/// homogenized functional of the affine base, read from `table`.
std::vector<GammaRow> recovery_convergence(const IntegrandSpec& spec,
                                           const RecoverySequenceSpec& rs,
                                           const GridFactory& grid_factory,
                                           const DensityTable& table, double p_norm = 0.0,
                                           unsigned threads = 0);

std::string gamma_csv_header();
void write_gamma_csv(std::ostream& os, const std::vector<GammaRow>& rows);

// ---------------------------------------------------------------------------
// Layered affine functions
// ---------------------------------------------------------------------------

struct LayeredPiece {
  Box box;
  std::vector<Matrix> slopes;
  std::vector<Vector> offsets;
};

/// Piecewise affine in x on a box partition, zero off the partition. Each
/// node is rendered from the first piece that contains it.
struct LayeredAffine {
  int m = 1;
  std::vector<LayeredPiece> pieces;

  /// Index of the first piece containing x, or -1.
  int piece_of(std::span<const double> x) const;
  void evaluate(int level, std::span<const double> x, std::span<double> out) const;
  SpaceTimeField render(const GridPtr& grid) const;
};

struct LayeredProjection {
  LayeredAffine layered;
  /// L^p distance between u and the layered function (midpoint rule, each
  /// cell attributed to the piece containing its midpoint).
  double error = 0.0;
};

/// Least-squares affine fit per piece and time level over the nodes of the
/// closed piece. Throws UnderdeterminedFit when a piece holds fewer than n+1
/// nodes or they do not span an affine frame.
LayeredProjection layered_project(const SpaceTimeField& u, const std::vector<Box>& partition,
                                  double p = 2.0);

/// Splits every box in two along each axis.
std::vector<Box> refine_partition(const std::vector<Box>& partition);

}  // namespace parahom
