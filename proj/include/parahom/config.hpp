#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "parahom/cell.hpp"
#include "parahom/domain.hpp"
#include "parahom/errors.hpp"
#include "parahom/functional.hpp"

namespace parahom {

class ConfigError : public Error {
 public:
  enum class Kind { missing_file, syntax, unknown_key, invariant };

  ConfigError(Kind kind, const std::string& what, int line = -1)
      : Error(what), kind_(kind), line_(line) {}

  Kind kind() const { return kind_; }
  /// 1-based source line, or -1 when unknown.
  int line() const { return line_; }

 private:
  Kind kind_;
  int line_;
};

enum class ExperimentKind {
  cell_solve,
  tabulate,
  recovery,
  gamma_min,
  convexity,
  oracle_compare,
  growth,
  layered
};

std::string to_string(ExperimentKind kind);
/// Accepts the subcommand spelling, e.g. "gamma-min".
std::optional<ExperimentKind> parse_experiment_kind(const std::string& text);

struct CellConfig {
  int nodes_per_period = 64;
  std::vector<int> k_list{1};
  CellSolveOptions options;
};

struct SpaceTimeConfig {
  std::vector<Box> boxes{Box{{0.0}, {1.0}}};
  std::vector<Ball> holes;
  double horizon = 1.0;
  int time_steps = 1;
  /// Spatial cells per oscillation period eps; 0 selects 4 * cells_per_period.
  int cells_per_eps = 0;

  Domain domain() const;
  /// Grids for one eps, resolving it with `cells_per_eps` (or the default).
  GridFactory grid_factory(int cells_per_period) const;
};

struct ExperimentConfig {
  std::string id;
  ExperimentKind kind = ExperimentKind::cell_solve;
  IntegrandSpec integrand;
  CellConfig cell;
  SpaceTimeConfig spacetime;
  std::uint64_t seed = 1;
  double tolerance = 0.02;

  // cell-solve, recovery, gamma-min
  Matrix lambda;
  Vector offset;
  double t = 0.0;
  std::vector<double> eps_list;
  bool with_recovery = true;

  // tabulate, convexity
  std::vector<double> t_grid{0.0};
  std::optional<LambdaGrid> lambda_grid;
  int segment_samples = 1;
  double convexity_tol = 1e-6;
  /// Point y0 at which the raw density is probed for comparison.
  std::optional<std::vector<double>> raw_point;

  // oracle-compare
  std::vector<std::string> cases;

  // growth
  std::size_t samples = 10000;

  // layered
  int levels = 4;
  int grid_cells = 256;
  double p_norm = 2.0;
};

struct RunConfig {
  std::string output = "out";
  std::uint64_t seed = 1;
  IntegrandSpec integrand;
  CellConfig cell;
  SpaceTimeConfig spacetime;
  std::vector<ExperimentConfig> experiments;
};

/// Strict parser: unknown keys, malformed values and violated invariants are
/// reported as ConfigError with the offending line where available.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);

}  // namespace parahom
