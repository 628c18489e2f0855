#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "parahom/grid.hpp"
#include "parahom/integrand.hpp"
#include "parahom/lbfgs.hpp"

namespace parahom {

struct CellSolveOptions {
  int max_iterations = 5000;
  /// Stationarity threshold, scaled by (1 + |lambda|^(p-1)).
  double gradient_tolerance = 1e-8;
  int multistart_count = 4;
  int history = 10;
  double armijo = 1e-4;
  double backtrack = 0.5;
  /// Optional delta: stop once the value changed by less than this over
  /// the final 10 iterations (0 disables).
  double value_gap = 0.0;
  std::uint64_t seed = 1;

  void validate() const;
  std::string canonical() const;
};

struct CellSolution {
  double value = 0.0;
  CorrectorField corrector;
  int iterations = 0;
  double residual = 0.0;
  bool stationary = false;
  /// Index of the start that produced the returned corrector; 0 is the
  /// zero corrector, extra warm starts follow the seeded starts.
  int best_start = 0;
  double value_gap = 0.0;
};

/// |kY|^{-1} integral over kY of f(y, t, lambda + D phi), midpoint rule.
double assemble_cell_energy(const IntegrandSpec& spec, double t, const Matrix& lambda,
                            const CorrectorField& corrector);

/// Gradient of assemble_cell_energy with respect to the interior nodal
/// values, laid out as (interior node in ascending order) * m + component.
std::vector<double> assemble_cell_gradient(const IntegrandSpec& spec, double t,
                                           const Matrix& lambda, const CorrectorField& corrector);

/// Interior node ids of a cell grid, ascending (the layout used above).
std::vector<Index> cell_interior_nodes(const CellGrid& grid);

/// Minimizes the cell energy over zero-trace correctors, from the zero
/// corrector, seeded laminate-type starts and any supplied warm starts.
CellSolution solve_cell(const IntegrandSpec& spec, double t, const Matrix& lambda,
                        const CellGrid& grid, const CellSolveOptions& options,
                        std::span<const CorrectorField> warm_starts = {});

using CellGridFactory = std::function<CellGrid(int k)>;
/// Factory producing [0,k]^n grids with a fixed resolution per period.
CellGridFactory uniform_cell_grids(int n, int nodes_per_period);

struct HomogenizedDensity {
  double value = 0.0;
  int best_k = 1;
  std::vector<int> k_values;
  std::vector<CellSolution> per_k;
  bool stationary = true;

  const CellSolution& best() const;
};

/// min over k in k_list of the cell problem on kY. Each k is warm-started
/// with the tiled best corrector of every earlier k that divides it.
HomogenizedDensity homogenized_density(const IntegrandSpec& spec, double t, const Matrix& lambda,
                                       const std::vector<int>& k_list,
                                       const CellGridFactory& grid_factory,
                                       const CellSolveOptions& options);

// ---------------------------------------------------------------------------
// Tabulated homogenized density
// ---------------------------------------------------------------------------

/// Sample points in M(m x n): a tensor grid over the mn entries (row-major
/// flattening) or a ray family s * D.
class LambdaGrid {
 public:
  enum class Kind { tensor, ray };

  static LambdaGrid tensor(int m, int n, std::vector<std::vector<double>> axes);
  static LambdaGrid ray(Matrix direction, std::vector<double> scales);
  /// 1 x 1 grid.
  static LambdaGrid scalar(std::vector<double> values);

  Kind kind() const { return kind_; }
  int rows() const { return m_; }
  int cols() const { return n_; }
  std::size_t size() const;
  Matrix point(std::size_t index) const;
  /// Interpolation axes: mn axes for tensor grids, the scale list for rays.
  const std::vector<std::vector<double>>& axes() const { return axes_; }
  const Matrix& direction() const { return direction_; }
  /// Axis coordinates of a matrix; throws ExtrapolationError when the matrix
  /// is off a ray.
  std::vector<double> coordinates(const Matrix& lambda) const;
  std::string canonical() const;

 private:
  Kind kind_ = Kind::tensor;
  int m_ = 1, n_ = 1;
  std::vector<std::vector<double>> axes_;
  Matrix direction_;
};

struct DensityEntry {
  double value = 0.0;
  int k = 1;
  bool stationary = true;
  double residual = 0.0;
};

struct TableLookup {
  double value = 0.0;
  bool touches_nonstationary = false;
};

/// Sampled f_bar(t, lambda) with multilinear interpolation in (t, axes).
struct DensityTable {
  std::vector<double> t_grid;
  LambdaGrid lambda_grid;
  /// Entry (ti, li) at ti * lambda_grid.size() + li.
  std::vector<DensityEntry> entries;
  std::uint64_t content_hash = 0;

  const DensityEntry& at(std::size_t ti, std::size_t li) const {
    return entries[ti * lambda_grid.size() + li];
  }
  /// Throws ExtrapolationError outside the sampled range. A table with a
  /// single t sample is treated as constant in time.
  TableLookup interpolate(double t, const Matrix& lambda) const;
};

/// Fills the table entry-wise via homogenized_density. Entries use
/// independent seeds derived from (options.seed, entry index), so the
/// result does not depend on `threads` (0 = serial).
DensityTable tabulate_density(const IntegrandSpec& spec, const std::vector<double>& t_grid,
                              const LambdaGrid& lambda_grid, const std::vector<int>& k_list,
                              const CellGridFactory& grid_factory, int nodes_per_period,
                              const CellSolveOptions& options, unsigned threads = 0);

/// Table of the raw density f(y0, t, lambda) on the same layout (for probing).
DensityTable sample_raw_density(const IntegrandSpec& spec, std::span<const double> y0,
                                const std::vector<double>& t_grid, const LambdaGrid& lambda_grid);

/// Hash of everything that determines a tabulation.
std::uint64_t table_content_hash(const IntegrandSpec& spec, const std::vector<double>& t_grid,
                                 const LambdaGrid& lambda_grid, const std::vector<int>& k_list,
                                 int nodes_per_period, const CellSolveOptions& options);

/// Header `t,lambda_0,...,lambda_{mn-1},value,k,stationary_flag`.
std::string density_csv_header(int m, int n);
void write_density_csv(std::ostream& os, const DensityTable& table);

/// Binary cache: magic "PHDT", u32 version, u64 content hash, then grids and
/// entries; all scalars little-endian.
void save_density_cache(const std::string& path, const DensityTable& table);
/// Empty when the file is missing, malformed, or keyed by another hash.
std::optional<DensityTable> load_density_cache(const std::string& path,
                                               std::uint64_t expected_hash);

// ---------------------------------------------------------------------------
// Convexity probe
// ---------------------------------------------------------------------------

struct ConvexityViolation {
  double t = 0.0;
  Matrix lambda_a, lambda_b;
  double s = 0.5;
  double value = 0.0;
  double chord = 0.0;
  double margin = 0.0;
};

struct ConvexityReport {
  std::size_t segments = 0;
  std::size_t points = 0;
  std::vector<ConvexityViolation> violations;
  bool passed() const { return violations.empty(); }
};

/// Checks f(t, (1-s) a + s b) <= (1-s) f(t, a) + s f(t, b) + tol on segments
/// between table nodes, at `segment_samples` interior points per segment
/// (1 = midpoint). Segments are unrestricted for n <= 2 and limited to
/// single-column changes for n > 2.
ConvexityReport convexity_probe(const DensityTable& table, int segment_samples,
                                double tol = 1e-6);

}  // namespace parahom
