#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "parahom/cell.hpp"
#include "parahom/errors.hpp"

using namespace parahom;

namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

IntegrandSpec sine_spec() { return make_separable(SinusoidalField{}, 2.0, 1.0, 3.0); }

// Reciprocal mean of 2 + sin(2 pi y) by a composite midpoint rule with 2^20
// points; the periodic integrand makes the rule spectrally accurate.
double sine_reciprocal_mean() {
  const int n = 1 << 20;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += 1.0 / (2.0 + std::sin(2.0 * M_PI * (i + 0.5) / n));
  return s / n;
}

CellSolveOptions quick_options() {
  CellSolveOptions o;
  o.multistart_count = 2;
  return o;
}

}  // namespace

TEST(CellEnergy, ZeroCorrectorSineAveragesToMean) {
  const auto spec = sine_spec();
  for (int N : {4, 8, 64}) {
    CellGrid grid(1, 1, N);
    EXPECT_NEAR(assemble_cell_energy(spec, 0.0, scalar(1.0), CorrectorField(grid, 1)), 2.0, 1e-10);
  }
}

TEST(CellEnergy, ConstantCoefficientZeroCorrector) {
  const auto spec = make_separable(ConstantField{2.5}, 3.0, 1.0, 3.0, {}, 1, 2);
  CellGrid grid(2, 1, 8);
  Matrix l(1, 2);
  l << 0.5, -1.0;
  EXPECT_NEAR(assemble_cell_energy(spec, 0.0, l, CorrectorField(grid, 1)),
              2.5 * std::pow(l.norm(), 3.0), 1e-13);
}

TEST(CellEnergy, GradientVanishesAtTheOrigin) {
  CellGrid grid(1, 1, 16);
  const auto g = assemble_cell_gradient(sine_spec(), 0.0, scalar(0.0), CorrectorField(grid, 1));
  EXPECT_EQ(g.size(), 15u);
  for (double v : g) EXPECT_EQ(v, 0.0);
}

TEST(CellEnergy, GradientMatchesCentralDifferences) {
  const auto spec = make_separable(CheckerboardField{1.0, 4.0}, 2.0, 1.0, 5.0, {}, 2, 2);
  CellGrid grid(2, 1, 6);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  CorrectorField phi(grid, 2);
  const auto interior = cell_interior_nodes(grid);
  for (Index node : interior)
    for (int i = 0; i < 2; ++i) phi.set(node, i, u(rng));
  Matrix l(2, 2);
  l << 1.0, 0.5, -0.25, 2.0;
  const auto g = assemble_cell_gradient(spec, 0.0, l, phi);
  ASSERT_EQ(g.size(), interior.size() * 2);
  const double h = 1e-6;
  double err = 0.0, scale = 0.0;
  for (std::size_t a = 0; a < interior.size(); ++a)
    for (int i = 0; i < 2; ++i) {
      CorrectorField plus = phi, minus = phi;
      plus.set(interior[a], i, phi.value(interior[a], i) + h);
      minus.set(interior[a], i, phi.value(interior[a], i) - h);
      const double fd = (assemble_cell_energy(spec, 0.0, l, plus) -
                         assemble_cell_energy(spec, 0.0, l, minus)) / (2 * h);
      err = std::max(err, std::abs(fd - g[a * 2 + i]));
      scale = std::max(scale, std::abs(g[a * 2 + i]));
    }
  EXPECT_LE(err, 1e-6 * scale);
}

TEST(SolveCell, SineMatchesReciprocalMeanOracle) {
  const double oracle = 1.0 / sine_reciprocal_mean();
  EXPECT_NEAR(oracle, std::sqrt(3.0), 1e-12);
  const auto sol = solve_cell(sine_spec(), 0.0, scalar(1.0), CellGrid(1, 1, 256), quick_options());
  EXPECT_TRUE(sol.stationary);
  EXPECT_NEAR(sol.value, oracle, 1e-3 * oracle);
}

TEST(SolveCell, LaminateHarmonicMean) {
  const auto spec = make_separable(LaminateField{1.0, 4.0}, 2.0, 1.0, 5.0);
  const double harmonic = 1.0 / (0.5 / 1.0 + 0.5 / 4.0);
  const auto sol = solve_cell(spec, 0.0, scalar(1.0), CellGrid(1, 1, 64), quick_options());
  EXPECT_NEAR(sol.value, harmonic, 1e-3 * harmonic);
}

TEST(SolveCell, ZeroGradientGivesZero) {
  const auto sol = solve_cell(sine_spec(), 0.0, scalar(0.0), CellGrid(1, 1, 32), quick_options());
  EXPECT_NEAR(sol.value, 0.0, 1e-14);
  for (double v : sol.corrector.values()) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(SolveCell, ConstantCoefficientNeedsNoCorrector) {
  const auto spec = make_separable(ConstantField{3.0}, 2.0, 1.0, 4.0, {}, 1, 2);
  Matrix l(1, 2);
  l << 0.7, -0.4;
  const auto sol = solve_cell(spec, 0.0, l, CellGrid(2, 1, 8), quick_options());
  EXPECT_NEAR(sol.value, 3.0 * l.squaredNorm(), 1e-12);
  for (double v : sol.corrector.values()) EXPECT_NEAR(v, 0.0, 1e-8);
}

TEST(SolveCell, BoundsHold) {
  const auto spec = make_separable(CheckerboardField{1.0, 4.0}, 2.0, 1.0, 5.0, {}, 1, 2);
  Matrix l(1, 2);
  l << 1.0, 0.5;
  CellGrid grid(2, 1, 12);
  const auto sol = solve_cell(spec, 0.0, l, grid, quick_options());
  EXPECT_LE(sol.value, assemble_cell_energy(spec, 0.0, l, CorrectorField(grid, 1)) + 1e-12);
  EXPECT_GE(sol.value, spec.C1 * l.squaredNorm());
  EXPECT_NEAR(sol.value, assemble_cell_energy(spec, 0.0, l, sol.corrector), 1e-12);
}

TEST(SolveCell, SerialRunsAreBitIdentical) {
  Matrix W = scalar(1.0);
  const auto spec = make_double_well(SinusoidalField{}, W, 1.0, 2.0, 1.0, 8.0);
  CellSolveOptions o;
  o.multistart_count = 6;
  o.seed = 42;
  const auto a = solve_cell(spec, 0.0, scalar(0.3), CellGrid(1, 2, 16), o);
  const auto b = solve_cell(spec, 0.0, scalar(0.3), CellGrid(1, 2, 16), o);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.best_start, b.best_start);
  ASSERT_EQ(a.corrector.values().size(), b.corrector.values().size());
  for (std::size_t i = 0; i < a.corrector.values().size(); ++i)
    EXPECT_EQ(a.corrector.values()[i], b.corrector.values()[i]);
}

TEST(SolveCell, DoubleWellFindsLaminate) {
  // With W = 1, c0 = 1 and lambda = 0 a laminate oscillating between the
  // wells halves the zero-corrector energy; the seeded starts must find it.
  const auto spec = make_double_well(ConstantField{1.0}, scalar(1.0), 1.0, 2.0, 1.0, 4.0);
  CellSolveOptions o;
  o.multistart_count = 17;
  const auto sol = solve_cell(spec, 0.0, scalar(0.0), CellGrid(1, 1, 16), o);
  EXPECT_LT(sol.value, 0.6);
  EXPECT_GT(sol.best_start, 0);
}

TEST(SolveCell, OptionsValidated) {
  CellSolveOptions o;
  o.multistart_count = 0;
  EXPECT_THROW(o.validate(), InvalidInput);
  o = {};
  o.gradient_tolerance = 0.0;
  EXPECT_THROW(o.validate(), InvalidInput);
}

TEST(SolveCell, DimensionMismatchRejected) {
  EXPECT_ANY_THROW(solve_cell(sine_spec(), 0.0, Matrix::Ones(1, 2), CellGrid(1, 1, 8), {}));
  EXPECT_ANY_THROW(solve_cell(sine_spec(), 0.0, scalar(1.0), CellGrid(2, 1, 8), {}));
}

TEST(Homogenized, ConvexFamilyOnePeriodSuffices) {
  const auto h = homogenized_density(sine_spec(), 0.0, scalar(1.0), {1, 2, 3},
                                     uniform_cell_grids(1, 32), quick_options());
  ASSERT_EQ(h.per_k.size(), 3u);
  for (const auto& s : h.per_k) EXPECT_NEAR(s.value, h.per_k[0].value, 1e-3 * h.per_k[0].value);
}

TEST(Homogenized, TiledWarmStartNeverWorsens) {
  Matrix W(1, 2);
  W << 1.0, 0.0;
  const auto spec = make_double_well(CheckerboardField{1.0, 2.0}, W, 1.0, 2.0, 1.0, 6.0);
  Matrix l(1, 2);
  l << 0.25, 0.5;
  const auto h = homogenized_density(spec, 0.0, l, {1, 2}, uniform_cell_grids(2, 8),
                                     quick_options());
  EXPECT_LE(h.per_k[1].value, h.per_k[0].value + 1e-6);
  EXPECT_EQ(h.value, std::min(h.per_k[0].value, h.per_k[1].value));
}

TEST(Homogenized, ZeroGradientEveryK) {
  const auto h = homogenized_density(sine_spec(), 0.0, scalar(0.0), {1, 2, 4},
                                     uniform_cell_grids(1, 16), quick_options());
  for (const auto& s : h.per_k) EXPECT_NEAR(s.value, 0.0, 1e-14);
}

TEST(Homogenized, KListMustAscend) {
  EXPECT_THROW(homogenized_density(sine_spec(), 0.0, scalar(1.0), {2, 1},
                                   uniform_cell_grids(1, 16), {}),
               InvalidInput);
}
