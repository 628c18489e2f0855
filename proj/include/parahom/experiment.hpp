#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "parahom/cell.hpp"
#include "parahom/functional.hpp"

namespace parahom {

// ---------------------------------------------------------------------------
// Dirichlet minimization of the oscillatory functional
// ---------------------------------------------------------------------------

struct OscillatoryOptions {
  int max_iterations = 5000;
  /// Stationarity threshold, scaled by (1 + max |lambda(t)|^(p-1)).
  double gradient_tolerance = 1e-8;
  /// Starts beyond the Dirichlet lift; only used for nonconvex integrands.
  int multistart_count = 1;
  int history = 10;
  std::uint64_t seed = 1;
  /// Time levels are independent problems and may run concurrently.
  unsigned threads = 0;
};

struct OscillatoryMinimum {
  double value = 0.0;
  SpaceTimeField field;
  double residual = 0.0;
  bool stationary = false;
  int iterations = 0;
};

/// Minimizes discrete F^eps over nodal fields equal to the affine data on the
/// boundary of Omega. Starts from the affine lift, seeded perturbations of it
/// (nonconvex integrands) and any `extra_starts`, keeping the best.
OscillatoryMinimum minimize_oscillatory(const IntegrandSpec& spec, double eps,
                                        const GridPtr& grid, const AffineData& dirichlet,
                                        const OscillatoryOptions& options,
                                        std::span<const SpaceTimeField> extra_starts = {});

// ---------------------------------------------------------------------------
// Convergence reports
// ---------------------------------------------------------------------------

struct Verdict {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct MinRow {
  double eps = 0.0;
  double F_min = 0.0;
  double F_limit = 0.0;
  double abs_gap = 0.0;
  double rel_gap = 0.0;
  /// F^eps at the recovery field; NaN when no recovery was run.
  double F_recovery = std::numeric_limits<double>::quiet_NaN();
  bool stationary = false;
};

/// Rows are stored in the (descending) eps order of the run; verdicts are
/// recomputable from the rows with the functions below.
struct GammaReport {
  std::string id;
  std::uint64_t spec_hash = 0;
  std::vector<GammaRow> recovery_rows;
  std::vector<MinRow> min_rows;
  std::vector<Verdict> verdicts;
  bool passed() const;
};

/// Slack used when comparing gaps that sit at round-off level.
double gap_slack(double reference);

/// gap_nonincreasing, final_gap (relative) and lp_ratio (consecutive L^p
/// distances shrink in proportion to eps, within 20%).
std::vector<Verdict> recovery_verdicts(const std::vector<GammaRow>& rows, double tolerance);
/// gap_monotone (from the third row on), final_gap, bracket, liminf_bound.
std::vector<Verdict> min_verdicts(const std::vector<MinRow>& rows, double tolerance);

std::string min_csv_header();
void write_min_csv(std::ostream& os, const std::vector<MinRow>& rows);

/// Rows of min F^eps against the homogenized minimum |Omega| integral of
/// f_bar(t, lambda(t)) dt read from `table`. When `recovery` is given its
/// field is evaluated and also used as a start, so F_min <= F_recovery.
GammaReport gamma_min_experiment(const IntegrandSpec& spec, const std::vector<double>& eps_list,
                                 const AffineData& dirichlet, const DensityTable& table,
                                 const GridFactory& grid_factory,
                                 const OscillatoryOptions& options, double tolerance,
                                 const RecoverySequenceSpec* recovery = nullptr);

// ---------------------------------------------------------------------------
// One-dimensional oracles
// ---------------------------------------------------------------------------

/// (integral over [0,1] of a^(-1/(p-1)))^(-(p-1)) |lambda|^p by adaptive
/// Gauss-Kronrod quadrature split at the coefficient's breakpoints.
double oracle_1d(const CoefficientField& a, double p, double lambda);

struct OracleCase {
  std::string name;
  IntegrandSpec spec;
  double lambda = 1.0;
  /// Closed-form f_bar(lambda).
  double closed_form = 0.0;
  std::string derivation;
  double omega_measure = 1.0;
  double horizon = 1.0;

  const CoefficientField& coefficient() const;
  /// Minimum of F under the affine Dirichlet datum lambda x on (0,1) x (0,T).
  double minimum() const { return closed_form * omega_measure * horizon; }
};

const std::vector<OracleCase>& oracle_cases();
/// Throws InvalidInput for an unknown name.
const OracleCase& oracle_case(const std::string& name);

}  // namespace parahom
