#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>
#include <sstream>

#include "parahom/domain.hpp"
#include "parahom/errors.hpp"
#include "parahom/grid.hpp"
#include "parahom/mesh.hpp"

using namespace parahom;

namespace {

GridPtr unit_grid(int n, int cells, double T = 1.0, int M = 1) {
  return std::make_shared<SpaceTimeGrid>(Domain::unit_cube(n), std::vector<int>(n, cells), T, M);
}

}  // namespace

TEST(Mesh, AffineFieldHasExactCellGradient) {
  BoxMesh mesh({0.0, -1.0}, {2.0, 1.0}, {6, 5});
  Matrix lambda(2, 2);
  lambda << 0.5, -1.25, 2.0, 0.75;
  std::vector<double> values(mesh.node_count() * 2);
  std::vector<double> x(2);
  for (Index node = 0; node < mesh.node_count(); ++node) {
    mesh.node_position(node, x);
    for (int i = 0; i < 2; ++i) values[node * 2 + i] = lambda(i, 0) * x[0] + lambda(i, 1) * x[1] + i;
  }
  Matrix g;
  for (Index c = 0; c < mesh.cell_count(); ++c) {
    mesh.cell_gradient(values, 2, c, g);
    EXPECT_LE((g - lambda).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(Mesh, ConstantFieldHasZeroGradient) {
  BoxMesh mesh({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, {3, 3, 3});
  std::vector<double> values(mesh.node_count(), 4.5);
  Matrix g;
  mesh.cell_gradient(values, 1, 7, g);
  EXPECT_EQ(g.norm(), 0.0);
}

TEST(Mesh, DifferenceQuotientOfSquare) {
  BoxMesh mesh({0.0}, {1.0}, {2});
  std::vector<double> values{0.0, 0.25, 1.0};
  Matrix g;
  mesh.cell_gradient(values, 1, 0, g);
  EXPECT_DOUBLE_EQ(g(0, 0), 0.5);
}

TEST(Mesh, LexicographicOrderingAxisZeroFastest) {
  BoxMesh mesh({0.0, 0.0}, {1.0, 1.0}, {2, 3});
  int multi[2];
  mesh.node_multi_index(1, multi);
  EXPECT_EQ(multi[0], 1);
  EXPECT_EQ(multi[1], 0);
  mesh.node_multi_index(3, multi);
  EXPECT_EQ(multi[0], 0);
  EXPECT_EQ(multi[1], 1);
}

TEST(CellGrid, NodeCountAndSide) {
  CellGrid grid(2, 3, 16);
  EXPECT_EQ(grid.nodes_per_axis(), 3 * 16 + 1);
  EXPECT_EQ(grid.mesh().node_count(), 49 * 49);
  EXPECT_DOUBLE_EQ(grid.spacing() * 16 * 3, 3.0);
  EXPECT_DOUBLE_EQ(grid.mesh().upper(1), 3.0);
}

TEST(Corrector, RejectsNonzeroTrace) {
  CellGrid grid(1, 1, 4);
  EXPECT_THROW(CorrectorField(grid, 1, {1.0, 0.0, 0.0, 0.0, 0.0}), InvalidInput);
  CorrectorField phi(grid, 1);
  EXPECT_THROW(phi.set(4, 0, 0.1), InvalidInput);
  phi.set(2, 0, 0.1);
  EXPECT_DOUBLE_EQ(phi.value(2, 0), 0.1);
}

TEST(Corrector, TilingRepeatsValuesAndKeepsZeroTrace) {
  CellGrid grid(2, 1, 4);
  CorrectorField phi(grid, 1);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  for (Index node = 0; node < grid.mesh().node_count(); ++node)
    if (!grid.mesh().on_bounding_boundary(node)) phi.set(node, 0, u(rng));
  const auto big = phi.tiled(3);
  EXPECT_EQ(big.grid().period_multiple(), 3);
  std::vector<double> y(2), a(1), b(1);
  for (double y0 : {0.3, 1.3, 2.3})
    for (double y1 : {0.6, 1.6, 2.6}) {
      y = {y0, y1};
      big.interpolate(y, a);
      y = {0.3, 0.6};
      phi.interpolate(y, b);
      EXPECT_NEAR(a[0], b[0], 1e-14);
    }
  for (Index node = 0; node < big.grid().mesh().node_count(); ++node)
    if (big.grid().mesh().on_bounding_boundary(node)) EXPECT_EQ(big.value(node, 0), 0.0);
  EXPECT_NEAR(big.mean_power(2.0), phi.mean_power(2.0), 1e-14);
}

TEST(Domain, UnitCubeTilesExactly) {
  for (int n = 1; n <= 3; ++n) {
    const auto tiling = tile_interior(Domain::unit_cube(n), 0.25);
    EXPECT_EQ(tiling.size(), static_cast<std::size_t>(std::pow(4, n)));
    EXPECT_NEAR(tiling.remainder_measure, 0.0, 1e-14);
  }
}

TEST(Domain, NonDividingTileSize) {
  const auto tiling = tile_interior(Domain::unit_cube(1), 0.3);
  ASSERT_EQ(tiling.size(), 3u);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(tiling.tile(i)[0], i);
  EXPECT_NEAR(tiling.remainder_measure, 0.1, 1e-12);
}

TEST(Domain, HoledSquareRemainderShrinks) {
  const double r = 0.3;
  Domain omega({Box{{0.0, 0.0}, {1.0, 1.0}}}, {Ball{{0.5, 0.5}, r}});
  EXPECT_NEAR(omega.measure(), 1.0 - M_PI * r * r, 1e-12);
  double previous = INFINITY;
  for (int j = 1; j <= 8; ++j) {
    const double eta = std::ldexp(1.0, -j);
    const auto tiling = tile_interior(omega, eta);
    // Direct count: a tile survives when its nearest point to the center is
    // outside the closed disk.
    const int per_axis = 1 << j;
    std::size_t expected = 0;
    for (int a = 0; a < per_axis; ++a)
      for (int b = 0; b < per_axis; ++b) {
        const double dx = std::max({a * eta - 0.5, 0.0, 0.5 - (a + 1) * eta});
        const double dy = std::max({b * eta - 0.5, 0.0, 0.5 - (b + 1) * eta});
        if (dx * dx + dy * dy > r * r) ++expected;
      }
    EXPECT_EQ(tiling.size(), expected) << "eta=" << eta;
    EXPECT_NEAR(tiling.remainder_measure, omega.measure() - expected * eta * eta, 1e-12);
    EXPECT_LE(tiling.remainder_measure, previous + 1e-15);
    previous = tiling.remainder_measure;
  }
  EXPECT_LT(previous, 0.02);
}

TEST(SpaceTimeGrid, HoleDeactivatesCells) {
  Domain omega({Box{{0.0, 0.0}, {1.0, 1.0}}}, {Ball{{0.5, 0.5}, 0.25}});
  SpaceTimeGrid grid(omega, {32, 32}, 2.0, 4);
  EXPECT_LT(grid.active_cells().size(), 32u * 32u);
  EXPECT_NEAR(grid.active_measure(), omega.measure(), 0.02);
  EXPECT_DOUBLE_EQ(grid.slab_width(), 0.5);
  EXPECT_DOUBLE_EQ(grid.time_level(0), 0.25);
  const double center[] = {0.5, 0.5};
  EXPECT_FALSE(omega.contains(center));
}

TEST(SpaceTimeGrid, RejectsBadInput) {
  EXPECT_ANY_THROW(SpaceTimeGrid(Domain::unit_cube(1), {8}, 0.0, 1));
  EXPECT_ANY_THROW(SpaceTimeGrid(Domain::unit_cube(1), {0}, 1.0, 1));
}

TEST(Norms, ZeroAndConstantFields) {
  const auto grid = std::make_shared<SpaceTimeGrid>(Domain::box({0.0}, {2.0}), std::vector<int>{16},
                                                    3.0, 2);
  SpaceTimeField zero(grid, 1);
  EXPECT_EQ(lp_norm(zero, 2.0), 0.0);
  const auto c = SpaceTimeField::from_function(
      grid, 1, [](std::span<const double>, double, std::span<double> out) { out[0] = 1.5; });
  for (double p : {1.5, 2.0, 3.0})
    EXPECT_NEAR(lp_norm(c, p), 1.5 * std::pow(2.0 * 3.0, 1.0 / p), 1e-12);
}

TEST(Norms, LinearFieldOnSquare) {
  const auto grid = unit_grid(2, 64);
  const auto u = SpaceTimeField::from_function(
      grid, 1, [](std::span<const double> x, double, std::span<double> out) { out[0] = x[0]; });
  EXPECT_NEAR(lp_norm(u, 2.0), 1.0 / std::sqrt(3.0), 1e-3);
  EXPECT_NEAR(gradient_lp_norm(u, 2.0), 1.0, 1e-12);
}

TEST(Norms, HomogeneityAndDistance) {
  const auto grid = unit_grid(1, 32, 1.0, 3);
  const auto u = SpaceTimeField::from_function(
      grid, 2, [](std::span<const double> x, double t, std::span<double> out) {
        out[0] = std::sin(3 * x[0]) + t, out[1] = x[0] * x[0];
      });
  EXPECT_NEAR(lp_norm(u.scaled(-2.5), 3.0), 2.5 * lp_norm(u, 3.0), 1e-12);
  const auto v = u.scaled(0.5);
  EXPECT_NEAR(lp_distance(u, v, 2.0), lp_norm(u - v, 2.0), 1e-14);
}

TEST(FieldCsv, RoundTrip) {
  Domain omega({Box{{0.0, 0.0}, {1.0, 1.0}}}, {Ball{{0.5, 0.5}, 0.2}});
  const auto grid = std::make_shared<SpaceTimeGrid>(omega, std::vector<int>{8, 8}, 1.0, 2);
  const auto u = SpaceTimeField::from_function(
      grid, 2, [](std::span<const double> x, double t, std::span<double> out) {
        out[0] = x[0] / 3.0 + t, out[1] = std::exp(x[1]);
      });
  std::stringstream ss;
  write_field_csv(ss, u);
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), field_csv_header(2, 2));
  const auto back = read_field_csv(ss, grid, 2);
  ASSERT_EQ(back.values().size(), u.values().size());
  for (std::size_t i = 0; i < u.values().size(); ++i) EXPECT_EQ(back.values()[i], u.values()[i]);
}
