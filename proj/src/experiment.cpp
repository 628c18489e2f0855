#include "parahom/experiment.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <sstream>

#include "parahom/errors.hpp"
#include "parahom/nodal_energy.hpp"
#include "parahom/util.hpp"

namespace parahom {

// ---------------------------------------------------------------------------
// minimize_oscillatory
// ---------------------------------------------------------------------------

OscillatoryMinimum minimize_oscillatory(const IntegrandSpec& spec, double eps,
                                        const GridPtr& grid, const AffineData& dirichlet,
                                        const OscillatoryOptions& options,
                                        std::span<const SpaceTimeField> extra_starts) {
  spec.validate();
  dirichlet.validate();
  if (options.max_iterations < 1 || !(options.gradient_tolerance > 0.0) ||
      options.multistart_count < 1 || options.history < 1)
    throw InvalidInput("invalid minimizer options");
  if (grid->dim() != spec.n || dirichlet.rows() != spec.m || dirichlet.cols() != spec.n)
    throw DimensionMismatch("boundary data does not match the integrand dimensions");
  check_resolution(*grid, eps, spec.cells_per_period);
  for (const auto& s : extra_starts)
    if (s.grid().mesh().node_count() != grid->mesh().node_count() ||
        s.grid().time_steps() != grid->time_steps() || s.components() != spec.m)
      throw DimensionMismatch("extra start lives on a different grid");

  const auto& mesh = grid->mesh();
  const int n = spec.n, m = spec.m, M = grid->time_steps();
  const auto& cells = grid->active_cells();
  std::vector<double> points(cells.size() * n);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    auto y = std::span<double>(points).subspan(c * n, n);
    mesh.cell_midpoint(cells[c], y);
    for (double& v : y) v /= eps;
  }

  double lambda_max = 0.0;
  for (const auto& L : dirichlet.slopes) lambda_max = std::max(lambda_max, L.norm());
  MinimizerOptions mopt;
  mopt.max_iterations = options.max_iterations;
  mopt.gradient_tolerance =
      options.gradient_tolerance * (1.0 + std::pow(lambda_max, spec.p - 1.0));
  mopt.history = options.history;

  const SpaceTimeField lift = affine_field(grid, dirichlet);
  const int extra_random = spec.is_convex() ? 0 : options.multistart_count - 1;
  const double amplitude = eps * std::max(1.0, lambda_max + spec.well_scale());

  struct LevelResult {
    double value = 0.0;
    std::vector<double> values;
    double residual = 0.0;
    bool stationary = false;
    int iterations = 0;
  };
  std::vector<LevelResult> levels(M);

  parallel_for(M, options.threads, [&](std::size_t jj) {
    const int j = static_cast<int>(jj);
    NodalProblem prob;
    prob.spec = &spec;
    prob.mesh = &mesh;
    prob.m = m;
    prob.t = grid->time_level(j);
    prob.offset = Matrix::Zero(m, n);
    prob.cells = cells;
    prob.cell_points = points;
    prob.cell_weight = mesh.cell_volume() * grid->slab_width();
    prob.free_nodes = grid->interior_nodes();
    const auto lv = lift.level(j);
    prob.fixed_values.assign(lv.begin(), lv.end());
    NodalEnergy energy(std::move(prob));
    const auto precond = energy.laplace_preconditioner();
    const Objective objective = [&energy](std::span<const double> x, std::span<double> g) {
      return energy.value_and_gradient(x, g);
    };

    std::vector<std::vector<double>> starts;
    starts.push_back(energy.restrict_to_free(lv));
    for (int s = 1; s <= extra_random; ++s) {
      std::mt19937_64 rng(derive_seed(options.seed, static_cast<std::uint64_t>(j) * 1000003u + s));
      std::uniform_real_distribution<double> unit(-1.0, 1.0);
      auto x = starts.front();
      for (double& v : x) v += amplitude * unit(rng);
      starts.push_back(std::move(x));
    }
    for (const auto& extra : extra_starts) starts.push_back(energy.restrict_to_free(extra.level(j)));

    MinimizerResult best;
    int iterations = 0;
    for (std::size_t s = 0; s < starts.size(); ++s) {
      MinimizerResult r = minimize_lbfgs(objective, std::move(starts[s]), mopt, precond);
      iterations += r.iterations;
      if (s == 0 || r.value < best.value) best = std::move(r);
    }
    levels[j] = LevelResult{best.value, energy.expand(best.x), best.residual, best.stationary,
                            iterations};
  });

  std::vector<double> values;
  values.reserve(lift.values().size());
  double total = 0.0, residual = 0.0;
  bool stationary = true;
  int iterations = 0;
  for (const auto& r : levels) {
    total += r.value;
    residual = std::max(residual, r.residual);
    stationary = stationary && r.stationary;
    iterations += r.iterations;
    values.insert(values.end(), r.values.begin(), r.values.end());
  }
  return OscillatoryMinimum{total, SpaceTimeField(grid, m, std::move(values)), residual,
                            stationary, iterations};
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

bool GammaReport::passed() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

double gap_slack(double reference) { return 1e-9 * std::max(std::abs(reference), 1.0); }

namespace {

std::string describe(const char* label, double value) {
  return std::string(label) + "=" + format_double(value);
}

}  // namespace

std::vector<Verdict> recovery_verdicts(const std::vector<GammaRow>& rows, double tolerance) {
  std::vector<Verdict> out;
  if (rows.empty()) return out;

  Verdict mono{"gap_nonincreasing", true, ""};
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].abs_gap > rows[i - 1].abs_gap + gap_slack(rows[i].F_limit)) {
      mono.pass = false;
      mono.detail = "gap grows at eps=" + format_double(rows[i].eps);
    }
  }
  out.push_back(mono);

  const auto& last = rows.back();
  const double rel = last.abs_gap / std::max(std::abs(last.F_limit), 1e-300);
  out.push_back({"final_gap", rel <= tolerance, describe("relative_gap", rel)});

  Verdict ratio{"lp_ratio", true, ""};
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i - 1].lp_distance == 0.0) continue;
    const double expected = rows[i].eps / rows[i - 1].eps;
    const double r = rows[i].lp_distance / rows[i - 1].lp_distance;
    ratio.detail += (ratio.detail.empty() ? "" : ",") + format_double(r);
    if (r < 0.8 * expected || r > 1.2 * expected) ratio.pass = false;
  }
  out.push_back(ratio);
  return out;
}

std::vector<Verdict> min_verdicts(const std::vector<MinRow>& rows, double tolerance) {
  std::vector<Verdict> out;
  if (rows.empty()) return out;

  Verdict mono{"gap_monotone", true, ""};
  for (std::size_t i = 2; i < rows.size(); ++i) {
    if (rows[i].abs_gap > rows[i - 1].abs_gap + gap_slack(rows[i].F_limit)) {
      mono.pass = false;
      mono.detail = "gap grows at eps=" + format_double(rows[i].eps);
    }
  }
  out.push_back(mono);

  const auto& last = rows.back();
  out.push_back({"final_gap", last.rel_gap <= tolerance, describe("relative_gap", last.rel_gap)});

  Verdict bracket{"bracket", true, ""};
  bool any = false;
  for (const auto& r : rows) {
    if (std::isnan(r.F_recovery)) continue;
    any = true;
    if (r.F_min > r.F_recovery + 1e-12) {
      bracket.pass = false;
      bracket.detail = "min exceeds recovery at eps=" + format_double(r.eps);
    }
  }
  if (any) out.push_back(bracket);

  const double bound = last.F_min + tolerance * std::abs(last.F_limit);
  out.push_back({"liminf_bound", last.F_limit <= bound, describe("F_limit", last.F_limit)});
  return out;
}

std::string min_csv_header() { return "eps,F_min_eps,F_limit,abs_gap,rel_gap,F_recovery,stationary"; }

void write_min_csv(std::ostream& os, const std::vector<MinRow>& rows) {
  os << min_csv_header() << "\n";
  for (const auto& r : rows) {
    os << format_double(r.eps) << "," << format_double(r.F_min) << "," << format_double(r.F_limit)
       << "," << format_double(r.abs_gap) << "," << format_double(r.rel_gap) << ",";
    if (std::isnan(r.F_recovery))
      os << "nan";
    else
      os << format_double(r.F_recovery);
    os << "," << (r.stationary ? 1 : 0) << "\n";
  }
}

GammaReport gamma_min_experiment(const IntegrandSpec& spec, const std::vector<double>& eps_list,
                                 const AffineData& dirichlet, const DensityTable& table,
                                 const GridFactory& grid_factory,
                                 const OscillatoryOptions& options, double tolerance,
                                 const RecoverySequenceSpec* recovery) {
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0)) throw InvalidInput("eps values must be positive");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1]))
      throw InvalidInput("eps values must be strictly decreasing");
  }
  if (!(tolerance > 0.0)) throw InvalidInput("tolerance must be positive");

  GammaReport report;
  report.spec_hash = fnv1a64(spec.canonical());
  report.min_rows.resize(eps_list.size());
  OscillatoryOptions inner = options;
  inner.threads = 0;
  parallel_for(eps_list.size(), options.threads, [&](std::size_t i) {
    const double eps = eps_list[i];
    const GridPtr grid = grid_factory(eps);
    MinRow& row = report.min_rows[i];
    row.eps = eps;
    std::vector<SpaceTimeField> extra;
    if (recovery != nullptr) {
      extra.push_back(build_recovery(*recovery, eps, grid));
      row.F_recovery = evaluate_oscillatory(spec, eps, extra.back());
    }
    const auto result = minimize_oscillatory(spec, eps, grid, dirichlet, inner, extra);
    row.F_min = result.value;
    row.stationary = result.stationary;
    row.F_limit = evaluate_homogenized(table, affine_field(grid, dirichlet)).value;
    row.abs_gap = std::abs(row.F_min - row.F_limit);
    row.rel_gap = row.abs_gap / std::max(std::abs(row.F_limit), 1e-300);
  });
  report.verdicts = min_verdicts(report.min_rows, tolerance);
  return report;
}

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

double oracle_1d(const CoefficientField& a, double p, double lambda) {
  if (!(p > 1.0)) throw InvalidInput("p must exceed 1");
  if (!std::isfinite(lambda)) throw InvalidInput("non-finite lambda");
  if (!(coefficient_min(a) > 0.0)) throw InvalidInput("coefficient must be positive");
  if (const auto* s = std::get_if<SinusoidalField>(&a); s && s->axis != 0)
    throw InvalidInput("one-dimensional oracle needs a coefficient varying along axis 0");
  if (const auto* l = std::get_if<LaminateField>(&a); l && l->axis != 0)
    throw InvalidInput("one-dimensional oracle needs a coefficient varying along axis 0");

  std::vector<double> breaks{0.0, 1.0};
  for (double b : coefficient_breakpoints(a, 0))
    if (b > 0.0 && b < 1.0) breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  const double q = 1.0 / (p - 1.0);
  const auto integrand = [&](double y) {
    const double v = coefficient_value(a, std::span<const double>(&y, 1));
    if (!(v > 0.0)) throw InvalidInput("coefficient must be positive");
    return std::pow(v, -q);
  };
  double mean = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
    mean += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        integrand, breaks[i], breaks[i + 1], 15, 1e-14);
  return std::pow(mean, -(p - 1.0)) * std::pow(std::abs(lambda), p);
}

const CoefficientField& OracleCase::coefficient() const {
  for (const auto& term : spec.terms)
    if (const auto* s = std::get_if<SeparableTerm>(&term)) return s->coefficient;
  throw InvalidInput("oracle case has no separable term");
}

const std::vector<OracleCase>& oracle_cases() {
  static const std::vector<OracleCase> cases = [] {
    std::vector<OracleCase> c;
    c.push_back({"sine", make_separable(SinusoidalField{2.0, 1.0, 0}, 2.0, 1.0, 3.0), 1.0,
                 std::sqrt(3.0),
                 "a = 2 + sin(2 pi y): integral of 1/a over a period is 1/sqrt(3) "
                 "(Weierstrass substitution), so f_bar = sqrt(3) lambda^2",
                 1.0, 1.0});
    c.push_back({"laminate", make_separable(LaminateField{1.0, 4.0, 0.5, 0}, 2.0, 1.0, 5.0), 1.0,
                 1.6, "equal fractions of 1 and 4: harmonic mean 2 / (1 + 1/4) = 1.6", 1.0, 1.0});
    c.push_back({"laminate-p3", make_separable(LaminateField{1.0, 4.0, 0.5, 0}, 3.0, 1.0, 5.0),
                 1.0, 16.0 / 9.0,
                 "p = 3: (0.5 * 1^(-1/2) + 0.5 * 4^(-1/2))^(-2) = (3/4)^(-2) = 16/9", 1.0, 1.0});
    c.push_back({"constant", make_separable(ConstantField{3.0}, 3.0, 3.0, 4.0), 1.5, 3.0 * 3.375,
                 "no oscillation: f_bar = c |lambda|^p = 3 * 1.5^3", 1.0, 1.0});
    return c;
  }();
  return cases;
}

const OracleCase& oracle_case(const std::string& name) {
  for (const auto& c : oracle_cases())
    if (c.name == name) return c;
  throw InvalidInput("unknown oracle case '" + name + "'");
}

}  // namespace parahom
