#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "parahom/cell.hpp"
#include "parahom/errors.hpp"
#include "test_support.hpp"

using namespace parahom;

namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

IntegrandSpec sine_spec() { return make_separable(SinusoidalField{}, 2.0, 1.0, 3.0); }

IntegrandSpec double_well_1d() {
  return make_double_well(ConstantField{1.0}, scalar(1.0), 1.0, 2.0, 1.0, 4.0);
}

CellSolveOptions quick_options() {
  CellSolveOptions o;
  o.multistart_count = 2;
  return o;
}

DensityTable sine_table(unsigned threads = 0) {
  return tabulate_density(sine_spec(), {0.0}, LambdaGrid::scalar({-2, -1, 0, 1, 2}), {1},
                          uniform_cell_grids(1, 256), 256, quick_options(), threads);
}

/// Table of a given function on a tensor grid, bypassing cell solves.
DensityTable synthetic_table(LambdaGrid grid, std::vector<double> t_grid,
                             const std::function<double(double, const Matrix&)>& f) {
  DensityTable table{t_grid, grid, {}, 0};
  for (double t : t_grid)
    for (std::size_t i = 0; i < grid.size(); ++i) table.entries.push_back({f(t, grid.point(i)), 1, true, 0.0});
  return table;
}

}  // namespace

TEST(Tabulate, SineValuesScaleLikeSquares) {
  const auto table = sine_table();
  ASSERT_EQ(table.entries.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    const double l = table.lambda_grid.point(i)(0, 0);
    EXPECT_NEAR(table.entries[i].value, std::sqrt(3.0) * l * l, 1e-3 * std::max(1.0, l * l));
  }
  EXPECT_EQ(table.entries[2].value, 0.0);
}

TEST(Tabulate, EntriesInsideGrowthEnvelope) {
  const auto spec = sine_spec();
  const auto table = sine_table();
  for (std::size_t i = 0; i < table.entries.size(); ++i) {
    const double l2 = table.lambda_grid.point(i).squaredNorm();
    EXPECT_GE(table.entries[i].value, spec.C1 * l2 - 1e-12);
    EXPECT_LE(table.entries[i].value, spec.C2 * (1 + l2));
  }
}

TEST(Tabulate, ThreadCountDoesNotChangeValues) {
  const auto a = sine_table(0), b = sine_table(3);
  EXPECT_EQ(a.content_hash, b.content_hash);
  for (std::size_t i = 0; i < a.entries.size(); ++i) EXPECT_EQ(a.entries[i].value, b.entries[i].value);
}

TEST(Tabulate, HashDependsOnInputs) {
  const auto spec = sine_spec();
  const auto grid = LambdaGrid::scalar({0, 1});
  const auto h1 = table_content_hash(spec, {0.0}, grid, {1}, 64, {});
  EXPECT_EQ(h1, table_content_hash(spec, {0.0}, grid, {1}, 64, {}));
  EXPECT_NE(h1, table_content_hash(spec, {0.0}, grid, {1}, 128, {}));
  EXPECT_NE(h1, table_content_hash(spec, {0.0}, grid, {1, 2}, 64, {}));
  EXPECT_NE(h1, table_content_hash(spec, {0.5}, grid, {1}, 64, {}));
}

TEST(Tabulate, CacheRoundTrip) {
  const auto dir = testutil::scratch_dir("cache");
  const auto table = sine_table();
  const std::string path = (dir / "table.bin").string();
  save_density_cache(path, table);
  const auto back = load_density_cache(path, table.content_hash);
  ASSERT_TRUE(back.has_value());
  ASSERT_EQ(back->entries.size(), table.entries.size());
  for (std::size_t i = 0; i < table.entries.size(); ++i) {
    EXPECT_EQ(back->entries[i].value, table.entries[i].value);
    EXPECT_EQ(back->entries[i].k, table.entries[i].k);
    EXPECT_EQ(back->entries[i].stationary, table.entries[i].stationary);
  }
  EXPECT_EQ(back->lambda_grid.canonical(), table.lambda_grid.canonical());
  EXPECT_FALSE(load_density_cache(path, table.content_hash + 1).has_value());
  EXPECT_FALSE(load_density_cache((dir / "missing.bin").string(), table.content_hash).has_value());
  std::ofstream(dir / "junk.bin") << "PHDTgarbage";
  EXPECT_FALSE(load_density_cache((dir / "junk.bin").string(), table.content_hash).has_value());
}

TEST(Tabulate, CsvHeaderAndRows) {
  std::ostringstream os;
  write_density_csv(os, sine_table());
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, density_csv_header(1, 1));
  EXPECT_EQ(line, "t,lambda_0,value,k,stationary_flag");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 5);
}

TEST(Interpolate, NodesAreExactAndLinearDataIsReproduced) {
  const auto grid = LambdaGrid::tensor(1, 2, {{-1, 0, 2}, {0, 1}});
  const auto table = synthetic_table(grid, {0.0, 1.0}, [](double t, const Matrix& l) {
    return 1.0 + 2.0 * t + 3.0 * l(0, 0) - l(0, 1);
  });
  Matrix l(1, 2);
  l << 0.5, 0.25;
  EXPECT_NEAR(table.interpolate(0.3, l).value, 1.0 + 0.6 + 1.5 - 0.25, 1e-13);
  l << 2.0, 1.0;
  EXPECT_EQ(table.interpolate(1.0, l).value, 1.0 + 2.0 + 6.0 - 1.0);
  l << 2.5, 0.0;
  EXPECT_THROW(table.interpolate(0.0, l), ExtrapolationError);
  l << 0.0, 0.0;
  EXPECT_THROW(table.interpolate(1.5, l), ExtrapolationError);
}

TEST(Interpolate, SingleTimeSampleIsConstantInTime) {
  const auto table = synthetic_table(LambdaGrid::scalar({0, 1}), {0.0},
                                     [](double, const Matrix& l) { return l(0, 0); });
  EXPECT_DOUBLE_EQ(table.interpolate(0.7, scalar(0.5)).value, 0.5);
}

TEST(Interpolate, NonstationaryEntriesAreReported) {
  auto table = synthetic_table(LambdaGrid::scalar({0, 1, 2}), {0.0},
                               [](double, const Matrix& l) { return l(0, 0); });
  table.entries[2].stationary = false;
  EXPECT_FALSE(table.interpolate(0.0, scalar(0.5)).touches_nonstationary);
  EXPECT_TRUE(table.interpolate(0.0, scalar(1.5)).touches_nonstationary);
}

TEST(LambdaGridTest, RayCoordinates) {
  Matrix d(1, 2);
  d << 1.0, 2.0;
  const auto ray = LambdaGrid::ray(d, {0.0, 0.5, 1.0});
  EXPECT_EQ(ray.size(), 3u);
  EXPECT_NEAR(ray.coordinates(0.75 * d)[0], 0.75, 1e-14);
  Matrix off(1, 2);
  off << 1.0, 0.0;
  EXPECT_THROW(ray.coordinates(off), ExtrapolationError);
}

TEST(Convexity, QuadraticHasNoViolations) {
  const auto table = synthetic_table(LambdaGrid::tensor(1, 2, {{-1, -0.5, 0, 0.5, 1}, {-1, 0, 1}}),
                                     {0.0}, [](double, const Matrix& l) { return l.squaredNorm(); });
  const auto report = convexity_probe(table, 3);
  EXPECT_TRUE(report.passed());
  EXPECT_GT(report.points, 0u);
}

TEST(Convexity, RawDoubleWellIsDetected) {
  const double y0[] = {0.25};
  std::vector<double> axis;
  for (int i = 0; i <= 24; ++i) axis.push_back(-1.5 + 0.125 * i);
  const auto raw = sample_raw_density(double_well_1d(), y0, {0.0}, LambdaGrid::scalar(axis));
  EXPECT_FALSE(convexity_probe(raw, 1).passed());
}

TEST(Convexity, HomogenizedDoubleWellIsConvex) {
  CellSolveOptions o;
  o.multistart_count = 33;
  const auto table = tabulate_density(double_well_1d(), {0.0},
                                      LambdaGrid::scalar({-1.0, -0.5, 0.0, 0.5, 1.0}), {1},
                                      uniform_cell_grids(1, 32), 32, o);
  const auto report = convexity_probe(table, 1, 1e-6);
  EXPECT_TRUE(report.passed()) << report.violations.size();
}

TEST(Convexity, NeedsTwoSamples) {
  const auto table = synthetic_table(LambdaGrid::scalar({1.0}), {0.0},
                                     [](double, const Matrix& l) { return l(0, 0); });
  EXPECT_THROW(convexity_probe(table, 1), InsufficientSamples);
}
