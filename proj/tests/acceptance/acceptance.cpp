// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "parahom/cell.hpp"
#include "parahom/config.hpp"
#include "parahom/experiment.hpp"
#include "parahom/functional.hpp"
#include "parahom/suite.hpp"
#include "parahom/util.hpp"
#include "test_support.hpp"

using namespace parahom;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int number;
  std::string name;
  double time_limit;  // seconds; 0 = none
  std::function<Outcome()> check;
};

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Reciprocal mean of 2 + sin(2 pi y): midpoint rule on 2^20 points.
double sine_reciprocal_mean() {
  const int n = 1 << 20;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += 1.0 / (2.0 + std::sin(2.0 * M_PI * (i + 0.5) / n));
  return s / n;
}

IntegrandSpec sine_spec() { return make_separable(SinusoidalField{}, 2.0, 1.0, 3.0); }
IntegrandSpec laminate_spec() { return make_separable(LaminateField{1.0, 4.0}, 2.0, 1.0, 5.0); }

IntegrandSpec checkerboard_spec() {
  return make_separable(CheckerboardField{1.0, 4.0}, 2.0, 1.0, 5.0, {}, 1, 2);
}

IntegrandSpec double_well_spec() {
  return make_double_well(SinusoidalField{}, scalar(1.0), 1.0, 2.0, 1.0, 7.0);
}

IntegrandSpec sum_spec() {
  IntegrandSpec spec = make_separable(LaminateField{1.0, 4.0, 0.5, 1}, 3.0, 1.0, 12.0,
                                      TimeWeight{1.5, 0.5, 1.0}, 1, 2);
  Matrix W(1, 2);
  W << 1.0, 1.0;
  spec.terms.push_back(DoubleWellTerm{ConstantField{1.0}, W, 1.0});
  return spec;
}

struct Family {
  std::string name;
  IntegrandSpec spec;
  int N;
};

std::vector<Family> families() {
  return {{"separable", sine_spec(), 32},
          {"two-phase", checkerboard_spec(), 8},
          {"double-well", double_well_spec(), 32},
          {"sum", sum_spec(), 8}};
}

ExperimentConfig find_experiment(const RunConfig& config, const std::string& id) {
  for (const auto& e : config.experiments)
    if (e.id == id) return e;
  throw std::runtime_error("no experiment " + id);
}

std::vector<std::map<std::string, double>> read_rows(const fs::path& path) {
  const auto csv = testutil::read_csv(path);
  std::vector<std::map<std::string, double>> rows;
  for (std::size_t i = 1; i < csv.size(); ++i) {
    std::map<std::string, double> r;
    for (std::size_t j = 0; j < csv[0].size(); ++j) r[csv[0][j]] = std::stod(csv[i][j]);
    rows.push_back(r);
  }
  return rows;
}

ExperimentConfig laminate_experiment(const std::string& id) {
  return find_experiment(parse_config(testutil::source_path("configs/laminate1d.cfg")), id);
}

Outcome ac1() {
  const double oracle = 1.0 / sine_reciprocal_mean();
  const auto sol = solve_cell(sine_spec(), 0.0, scalar(1.0), CellGrid(1, 1, 256), {});
  const double rel = std::abs(sol.value - oracle) / oracle;
  return {rel <= 1e-3, "value " + num(sol.value) + " oracle " + num(oracle) + " rel " + num(rel)};
}

Outcome ac2() {
  const double harmonic = 1.0 / (0.5 / 1.0 + 0.5 / 4.0);
  const auto h = homogenized_density(laminate_spec(), 0.0, scalar(1.0), {1},
                                     uniform_cell_grids(1, 64), {});
  const double rel = std::abs(h.value - harmonic) / harmonic;
  return {rel <= 1e-3, "coefficient " + num(h.value) + " harmonic mean " + num(harmonic) +
                           " rel " + num(rel)};
}

Outcome ac3() {
  const auto e = laminate_experiment("minima");
  const auto dir = testutil::scratch_dir("acceptance_minima");
  const auto outcome = run_experiment(e, dir, 0);
  if (outcome.status == ExperimentOutcome::Status::error) return {false, outcome.message};
  const auto rows = read_rows(dir / outcome.rows_file);
  const double closed = 1.6 * 1.0 * e.spacetime.horizon;
  bool monotone = true, reference = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    reference = reference && std::abs(rows[i].at("F_limit") - closed) <= 1e-3 * closed;
    if (i >= 2)
      monotone = monotone && rows[i].at("abs_gap") <= rows[i - 1].at("abs_gap") +
                                                          gap_slack(rows[i].at("F_limit"));
  }
  const double final_rel = rows.back().at("abs_gap") / std::abs(rows.back().at("F_limit"));
  return {monotone && reference && final_rel <= 0.02 && rows.size() == 5,
          std::to_string(rows.size()) + " rows, monotone " + (monotone ? "yes" : "no") +
              ", final rel gap " + num(final_rel) + ", F=" + num(rows.back().at("F_limit"))};
}

Outcome ac4() {
  const auto e = laminate_experiment("recovery");
  const auto dir = testutil::scratch_dir("acceptance_recovery");
  const auto outcome = run_experiment(e, dir, 0);
  if (outcome.status == ExperimentOutcome::Status::error) return {false, outcome.message};
  const auto rows = read_rows(dir / outcome.rows_file);
  bool monotone = true, ratios = true;
  double worst_low = INFINITY, worst_high = -INFINITY;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    monotone = monotone &&
               rows[i].at("abs_gap") <= rows[i - 1].at("abs_gap") + gap_slack(rows[i].at("F_limit"));
    const double ratio = rows[i].at("lp_distance") / rows[i - 1].at("lp_distance");
    worst_low = std::min(worst_low, ratio), worst_high = std::max(worst_high, ratio);
    ratios = ratios && ratio >= 0.4 && ratio <= 0.6;
  }
  const double final_rel = rows.back().at("abs_gap") / std::abs(rows.back().at("F_limit"));
  return {monotone && ratios && final_rel <= 0.02 && rows.size() == 5,
          "nonincreasing " + std::string(monotone ? "yes" : "no") + ", final rel gap " +
              num(final_rel) + ", Lp ratios in [" + num(worst_low) + ", " + num(worst_high) + "]"};
}

Outcome ac5() {
  std::size_t violations = 0, entries = 0, outside = 0;
  for (const auto& f : families()) {
    violations += check_growth(f.spec, 10000, derive_seed(5, entries)).violations.size();
    const int mn = f.spec.m * f.spec.n;
    std::vector<std::vector<double>> axes(mn, std::vector<double>{-1.0, 0.0, 1.5});
    CellSolveOptions options;
    options.multistart_count = 2 * f.N + 1;
    const auto table = tabulate_density(f.spec, {0.0, 0.5}, LambdaGrid::tensor(f.spec.m, f.spec.n, axes),
                                        {1}, uniform_cell_grids(f.spec.n, f.N), f.N, options);
    for (std::size_t ti = 0; ti < table.t_grid.size(); ++ti)
      for (std::size_t li = 0; li < table.lambda_grid.size(); ++li) {
        const double l = std::pow(table.lambda_grid.point(li).norm(), f.spec.p);
        const double v = table.at(ti, li).value;
        ++entries;
        if (v < f.spec.C1 * l - 1e-12 || v > f.spec.C2 * (1.0 + l)) ++outside;
      }
  }
  return {violations == 0 && outside == 0,
          std::to_string(violations) + " sample violations over 4 x 10000, " +
              std::to_string(outside) + " of " + std::to_string(entries) +
              " table entries outside the envelope"};
}

Outcome ac6() {
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  double worst = 0.0;
  int points = 0;
  for (const auto& f : families()) {
    CellGrid grid(f.spec.n, 1, f.spec.n == 1 ? 16 : 6);
    const auto interior = cell_interior_nodes(grid);
    for (int s = 0; s < 10; ++s) {
      CorrectorField phi(grid, f.spec.m);
      for (Index node : interior)
        for (int i = 0; i < f.spec.m; ++i) phi.set(node, i, u(rng));
      Matrix l(f.spec.m, f.spec.n);
      for (int i = 0; i < l.size(); ++i) l(i / f.spec.n, i % f.spec.n) = 4.0 * u(rng);
      const double t = 0.5 + u(rng);
      const auto g = assemble_cell_gradient(f.spec, t, l, phi);
      const double h = 1e-6;
      double err = 0.0, scale = 0.0;
      for (std::size_t a = 0; a < interior.size(); ++a)
        for (int i = 0; i < f.spec.m; ++i) {
          const double v0 = phi.value(interior[a], i);
          CorrectorField plus = phi, minus = phi;
          plus.set(interior[a], i, v0 + h);
          minus.set(interior[a], i, v0 - h);
          const double fd = (assemble_cell_energy(f.spec, t, l, plus) -
                             assemble_cell_energy(f.spec, t, l, minus)) / (2.0 * h);
          err = std::max(err, std::abs(fd - g[a * f.spec.m + i]));
          scale = std::max(scale, std::abs(g[a * f.spec.m + i]));
        }
      worst = std::max(worst, err / std::max(scale, 1e-300));
      ++points;
    }
  }
  return {worst <= 1e-6, std::to_string(points) + " points, worst relative error " + num(worst)};
}

Outcome ac7() {
  std::vector<Family> specs = families();
  specs.push_back({"laminate", laminate_spec(), 32});
  bool ok = true;
  std::string detail;
  double convex_rel = 0.0;
  for (const auto& f : specs) {
    Matrix l = Matrix::Constant(f.spec.m, f.spec.n, 0.6);
    l(0, 0) = 1.0;
    CellSolveOptions options;
    options.multistart_count = 2 * f.N + 1;
    const auto h = homogenized_density(f.spec, 0.25, l, {1, 2}, uniform_cell_grids(f.spec.n, f.N),
                                       options);
    const double f1 = h.per_k[0].value, f2 = h.per_k[1].value;
    ok = ok && f2 <= f1 + 1e-6;
    detail += f.name + " " + num(f1) + "->" + num(f2) + "; ";
    if (f.name == "separable") {
      convex_rel = std::abs(f2 - f1) / f1;
      ok = ok && convex_rel <= 1e-3;
    }
  }
  return {ok, detail + "convex rel diff " + num(convex_rel)};
}

Outcome ac8() {
  const auto spec = make_double_well(ConstantField{1.0}, scalar(1.0), 1.0, 2.0, 1.0, 4.0);
  std::vector<double> axis;
  for (int i = 0; i < 25; ++i) axis.push_back(-1.5 + 3.0 * i / 24.0);
  const auto grid = LambdaGrid::scalar(axis);
  CellSolveOptions options;
  options.multistart_count = 65;
  const auto table = tabulate_density(spec, {0.0}, grid, {1}, uniform_cell_grids(1, 64), 64, options);
  const auto homogenized = convexity_probe(table, 1, 1e-6);
  const double y0[] = {0.25};
  const auto raw = convexity_probe(sample_raw_density(spec, y0, {0.0}, grid), 1, 1e-6);
  return {homogenized.violations.empty() && !raw.violations.empty(),
          std::to_string(homogenized.violations.size()) + " homogenized violations in " +
              std::to_string(homogenized.points) + " points, " +
              std::to_string(raw.violations.size()) + " raw violations"};
}

Outcome ac9() {
  const auto grid = std::make_shared<SpaceTimeGrid>(Domain::unit_cube(1), std::vector<int>{256}, 1.0, 1);
  const auto u = SpaceTimeField::from_function(
      grid, 1, [](std::span<const double> x, double, std::span<double> out) { out[0] = x[0] * x[0]; });
  std::vector<Box> partition{Box{{0.0}, {1.0}}};
  std::vector<double> errors;
  for (int level = 0; level < 4; ++level) {
    errors.push_back(layered_project(u, partition, 2.0).error);
    partition = refine_partition(partition);
  }
  bool monotone = true;
  for (std::size_t i = 1; i < errors.size(); ++i) monotone = monotone && errors[i] <= errors[i - 1] + 1e-12;
  const double ratio = errors.back() / errors.front();
  std::string detail = "errors";
  for (double e : errors) detail += " " + num(e);
  return {monotone && ratio <= 0.25, detail + ", level-3 ratio " + num(ratio)};
}

std::map<std::string, std::string> csv_files(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root))
    if (entry.is_regular_file() && entry.path().extension() == ".csv")
      files[fs::relative(entry.path(), root).string()] = testutil::slurp(entry.path());
  return files;
}

Outcome ac10() {
  const auto config = parse_config(testutil::source_path("configs/suite.cfg"));
  const auto a = testutil::scratch_dir("acceptance_suite_a");
  const auto b = testutil::scratch_dir("acceptance_suite_b");
  SuiteOptions options;
  options.threads = 0;
  const auto ra = run_suite(config, a, options);
  const auto rb = run_suite(config, b, options);
  const auto fa = csv_files(a), fb = csv_files(b);
  const bool identical = !fa.empty() && fa == fb;
  return {identical, std::to_string(fa.size()) + " CSV files, byte-identical " +
                         (identical ? "yes" : "no") + ", suite verdicts " +
                         (ra.passed() && rb.passed() ? "pass" : "FAIL")};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "sine cell oracle", 5, ac1},
      {2, "laminate harmonic mean", 5, ac2},
      {3, "convergence of minima", 120, ac3},
      {4, "recovery sequence", 120, ac4},
      {5, "growth envelope", 0, ac5},
      {6, "cell gradient vs finite differences", 0, ac6},
      {7, "k-monotonicity", 0, ac7},
      {8, "convexity probe", 0, ac8},
      {9, "layered-affine approximation", 0, ac9},
      {10, "serial determinism", 0, ac10},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.check();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit > 0 && seconds > c.time_limit) {
      outcome.pass = false;
      outcome.detail += " (over the " + num(c.time_limit) + " s limit)";
    }
    if (!outcome.pass) ++failures;
    std::cout << "AC" << c.number << " " << (outcome.pass ? "PASS" : "FAIL") << " " << c.name
              << " [" << num(seconds) << " s]: " << outcome.detail << std::endl;
  }
  std::cout << (failures == 0 ? "all acceptance criteria pass" : "acceptance failures: " + std::to_string(failures))
            << std::endl;
  return failures == 0 ? 0 : 1;
}
