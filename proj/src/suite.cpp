#include "parahom/suite.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "parahom/errors.hpp"
#include "parahom/report.hpp"
#include "parahom/util.hpp"

namespace parahom {

namespace fs = std::filesystem;

std::string to_string(ExperimentOutcome::Status status) {
  switch (status) {
    case ExperimentOutcome::Status::pass: return "pass";
    case ExperimentOutcome::Status::fail: return "fail";
    case ExperimentOutcome::Status::error: return "error";
  }
  return "error";
}

bool SuiteReport::passed() const {
  return std::all_of(experiments.begin(), experiments.end(), [](const ExperimentOutcome& e) {
    return e.status == ExperimentOutcome::Status::pass;
  });
}

namespace {

/// Collects artifacts of one experiment below out_dir/<id>/.
class Artifacts {
 public:
  Artifacts(const fs::path& out_dir, const std::string& id, ExperimentOutcome& outcome)
      : root_(out_dir), id_(id), outcome_(outcome) {
    fs::create_directories(root_ / id_);
  }

  std::ofstream open(const std::string& name) {
    const fs::path rel = fs::path(id_) / name;
    outcome_.files.push_back(rel.generic_string());
    std::ofstream os(root_ / rel, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot write " + (root_ / rel).string());
    return os;
  }
  std::string path(const std::string& name) const { return (root_ / id_ / name).string(); }
  std::string relative(const std::string& name) const { return (fs::path(id_) / name).generic_string(); }

 private:
  fs::path root_;
  std::string id_;
  ExperimentOutcome& outcome_;
};

double lambda_power(const Matrix& lambda, double p) { return std::pow(lambda.norm(), p); }

std::string matrix_text(const Matrix& M) {
  std::string s = "[";
  for (Index i = 0; i < M.rows(); ++i)
    for (Index j = 0; j < M.cols(); ++j)
      s += (i + j > 0 ? " " : "") + format_double(M(i, j));
  return s + "]";
}

// ---------------------------------------------------------------------------
// Per-kind runners
// ---------------------------------------------------------------------------

void run_cell_solve(const ExperimentConfig& e, Artifacts& art, ExperimentOutcome& out) {
  const auto& spec = e.integrand;
  const auto factory = uniform_cell_grids(spec.n, e.cell.nodes_per_period);
  const auto h = homogenized_density(spec, e.t, e.lambda, e.cell.k_list, factory, e.cell.options);

  {
    auto os = art.open("per_k.csv");
    os << "k,value,iterations,residual,stationary,best_start\n";
    for (std::size_t i = 0; i < h.k_values.size(); ++i) {
      const auto& s = h.per_k[i];
      os << h.k_values[i] << "," << format_double(s.value) << "," << s.iterations << ","
         << format_double(s.residual) << "," << (s.stationary ? 1 : 0) << "," << s.best_start << "\n";
    }
  }
  out.rows_file = art.relative("per_k.csv");
  {
    auto os = art.open("corrector.csv");
    write_corrector_csv(os, h.best().corrector, e.t);
  }

  out.verdicts.push_back({"stationary", h.stationary, ""});
  Verdict upper{"upper_bound", true, ""};
  for (std::size_t i = 0; i < h.k_values.size(); ++i) {
    const CorrectorField zero(factory(h.k_values[i]), spec.m);
    const double e0 = assemble_cell_energy(spec, e.t, e.lambda, zero);
    if (h.per_k[i].value > e0 + 1e-12) upper.pass = false;
  }
  out.verdicts.push_back(upper);
  const double lower = spec.C1 * lambda_power(e.lambda, spec.p);
  Verdict low{"lower_bound", true, ""};
  for (const auto& s : h.per_k)
    if (s.value < lower - 1e-9) low.pass = false;
  out.verdicts.push_back(low);
  Verdict mono{"k_monotone", true, ""};
  for (std::size_t i = 0; i < h.k_values.size(); ++i)
    for (std::size_t j = i + 1; j < h.k_values.size(); ++j)
      if (h.k_values[j] % h.k_values[i] == 0 && h.per_k[j].value > h.per_k[i].value + 1e-6) {
        mono.pass = false;
        mono.detail = "k=" + std::to_string(h.k_values[j]);
      }
  out.verdicts.push_back(mono);
  out.summary = "value=" + format_double(h.value) + " best_k=" + std::to_string(h.best_k) +
                " lambda=" + matrix_text(e.lambda);
}

DensityTable cached_table(const ExperimentConfig& e, Artifacts& art, unsigned threads) {
  const auto& spec = e.integrand;
  const auto hash = table_content_hash(spec, e.t_grid, *e.lambda_grid, e.cell.k_list,
                                       e.cell.nodes_per_period, e.cell.options);
  const std::string cache = art.path("table.bin");
  if (auto table = load_density_cache(cache, hash)) return *table;
  auto table = tabulate_density(spec, e.t_grid, *e.lambda_grid, e.cell.k_list,
                                uniform_cell_grids(spec.n, e.cell.nodes_per_period),
                                e.cell.nodes_per_period, e.cell.options, threads);
  save_density_cache(cache, table);
  return table;
}

Verdict envelope_verdict(const IntegrandSpec& spec, const DensityTable& table) {
  Verdict v{"growth_envelope", true, ""};
  std::size_t bad = 0;
  for (std::size_t ti = 0; ti < table.t_grid.size(); ++ti) {
    for (std::size_t li = 0; li < table.lambda_grid.size(); ++li) {
      const double a = lambda_power(table.lambda_grid.point(li), spec.p);
      const double value = table.at(ti, li).value;
      if (value < spec.C1 * a - 1e-9 || value > spec.C2 * (1.0 + a) + 1e-9) ++bad;
    }
  }
  v.pass = bad == 0;
  v.detail = std::to_string(bad) + " entries outside";
  return v;
}

void run_tabulate(const ExperimentConfig& e, Artifacts& art, ExperimentOutcome& out,
                  unsigned threads) {
  const auto table = cached_table(e, art, threads);
  {
    auto os = art.open("density.csv");
    write_density_csv(os, table);
  }
  out.files.push_back(art.relative("table.bin"));
  out.rows_file = art.relative("density.csv");
  out.verdicts.push_back(envelope_verdict(e.integrand, table));
  std::size_t nonstationary = 0;
  for (const auto& entry : table.entries) nonstationary += entry.stationary ? 0 : 1;
  out.verdicts.push_back(
      {"stationary", nonstationary == 0, std::to_string(nonstationary) + " non-stationary entries"});
  out.summary = std::to_string(table.entries.size()) + " entries, hash " + hex64(table.content_hash);
}

/// Cell solves at every time level for the affine datum of a recovery or
/// gamma-min experiment: the table of f_bar and the correctors at one k.
struct CellData {
  DensityTable table;
  RecoverySequenceSpec recovery;
};

CellData solve_levels(const ExperimentConfig& e) {
  const auto& spec = e.integrand;
  const int M = e.spacetime.time_steps;
  const double T = e.spacetime.horizon;
  const auto factory = uniform_cell_grids(spec.n, e.cell.nodes_per_period);

  CellData data;
  std::vector<std::vector<double>> axes(spec.m * spec.n);
  for (int i = 0; i < spec.m * spec.n; ++i) axes[i] = {e.lambda(i / spec.n, i % spec.n)};
  data.table.lambda_grid = LambdaGrid::tensor(spec.m, spec.n, axes);

  int k_star = 0;
  for (int j = 0; j < M; ++j) {
    const double t = (j + 0.5) * T / M;
    CellSolveOptions options = e.cell.options;
    options.seed = derive_seed(e.cell.options.seed, static_cast<std::uint64_t>(j));
    const auto h = homogenized_density(spec, t, e.lambda, e.cell.k_list, factory, options);
    if (j == 0) k_star = h.best_k;
    const auto it = std::find(h.k_values.begin(), h.k_values.end(), k_star);
    const auto& chosen = h.per_k[static_cast<std::size_t>(it - h.k_values.begin())];
    data.table.t_grid.push_back(t);
    data.table.entries.push_back({h.value, h.best_k, h.stationary, h.best().residual});
    data.recovery.correctors.push_back(chosen.corrector);
  }
  data.recovery.base = AffineData::constant(e.lambda, e.offset, M);
  data.recovery.delta = e.cell.options.value_gap;
  data.recovery.eps_list = e.eps_list;
  data.recovery.cells_per_period = spec.cells_per_period;
  return data;
}

void write_gap_plot(Artifacts& art, const std::string& title, const std::vector<PlotSeries>& s) {
  auto os = art.open("gap.svg");
  write_loglog_svg(os, title, "eps", "value", s);
}

void run_recovery(const ExperimentConfig& e, Artifacts& art, ExperimentOutcome& out,
                  unsigned threads) {
  const auto data = solve_levels(e);
  const auto factory = e.spacetime.grid_factory(e.integrand.cells_per_period);
  const auto rows = recovery_convergence(e.integrand, data.recovery, factory, data.table, 0.0, threads);
  {
    auto os = art.open("rows.csv");
    write_gamma_csv(os, rows);
  }
  out.rows_file = art.relative("rows.csv");
  PlotSeries gap{"|F_eps - F|", {}, {}}, dist{"Lp distance", {}, {}};
  for (const auto& r : rows) {
    gap.x.push_back(r.eps), gap.y.push_back(r.abs_gap);
    dist.x.push_back(r.eps), dist.y.push_back(r.lp_distance);
  }
  write_gap_plot(art, e.id + ": recovery sequence", {gap, dist});
  out.verdicts = recovery_verdicts(rows, e.tolerance);
  const auto& last = rows.back();
  out.summary = "final F_eps=" + format_double(last.F_eps) + " F=" + format_double(last.F_limit);
}

void run_gamma_min(const ExperimentConfig& e, Artifacts& art, ExperimentOutcome& out,
                   unsigned threads) {
  const auto data = solve_levels(e);
  const auto factory = e.spacetime.grid_factory(e.integrand.cells_per_period);
  OscillatoryOptions options;
  options.max_iterations = e.cell.options.max_iterations;
  options.gradient_tolerance = e.cell.options.gradient_tolerance;
  options.multistart_count = e.cell.options.multistart_count;
  options.history = e.cell.options.history;
  options.seed = e.seed;
  options.threads = threads;
  const auto report = gamma_min_experiment(e.integrand, e.eps_list, data.recovery.base, data.table,
                                           factory, options, e.tolerance,
                                           e.with_recovery ? &data.recovery : nullptr);
  {
    auto os = art.open("rows.csv");
    write_min_csv(os, report.min_rows);
  }
  out.rows_file = art.relative("rows.csv");
  PlotSeries gap{"|min F_eps - min F|", {}, {}};
  for (const auto& r : report.min_rows) gap.x.push_back(r.eps), gap.y.push_back(r.abs_gap);
  write_gap_plot(art, e.id + ": minima", {gap});
  out.verdicts = report.verdicts;
  const auto& last = report.min_rows.back();
  out.summary = "final min F_eps=" + format_double(last.F_min) + " F=" + format_double(last.F_limit);
}

void write_violations(std::ostream& os, const std::string& source,
                      const std::vector<ConvexityViolation>& list) {
  for (const auto& v : list) {
    os << source << "," << format_double(v.t) << "," << format_double(v.s) << ","
       << format_double(v.value) << "," << format_double(v.chord) << "," << format_double(v.margin)
       << "," << matrix_text(v.lambda_a) << "," << matrix_text(v.lambda_b) << "\n";
  }
}

void run_convexity(const ExperimentConfig& e, Artifacts& art, ExperimentOutcome& out,
                   unsigned threads) {
  const auto table = cached_table(e, art, threads);
  {
    auto os = art.open("density.csv");
    write_density_csv(os, table);
  }
  out.files.push_back(art.relative("table.bin"));
  const auto report = convexity_probe(table, e.segment_samples, e.convexity_tol);
  std::optional<ConvexityReport> raw;
  if (e.raw_point) {
    const auto raw_table = sample_raw_density(e.integrand, *e.raw_point, e.t_grid, *e.lambda_grid);
    raw = convexity_probe(raw_table, e.segment_samples, e.convexity_tol);
  }
  {
    auto os = art.open("violations.csv");
    os << "source,t,s,value,chord,margin,lambda_a,lambda_b\n";
    write_violations(os, "homogenized", report.violations);
    if (raw) write_violations(os, "raw", raw->violations);
  }
  out.rows_file = art.relative("violations.csv");
  out.verdicts.push_back({"homogenized_convex", report.passed(),
                          std::to_string(report.violations.size()) + " violations in " +
                              std::to_string(report.points) + " points"});
  if (raw)
    out.verdicts.push_back({"raw_detects", !raw->passed(),
                            std::to_string(raw->violations.size()) + " raw violations"});
  out.summary = std::to_string(report.violations.size()) + " homogenized violations";
}

void run_oracle_compare(const ExperimentConfig& e, Artifacts& art, ExperimentOutcome& out) {
  auto os = art.open("rows.csv");
  os << "case,lambda,oracle,closed_form,computed,rel_gap\n";
  Verdict agree{"oracle_agreement", true, ""};
  Verdict closed{"closed_form_agreement", true, ""};
  double worst = 0.0;
  for (const auto& name : e.cases) {
    IntegrandSpec spec;
    double lambda = 0.0;
    double closed_form = std::numeric_limits<double>::quiet_NaN();
    CoefficientField coefficient;
    double weight = 1.0;
    if (name == "config") {
      spec = e.integrand;
      lambda = e.lambda(0, 0);
      if (spec.terms.size() != 1 || !std::holds_alternative<SeparableTerm>(spec.terms[0]))
        throw InvalidInput("the config oracle case needs a single separable term");
      coefficient = std::get<SeparableTerm>(spec.terms[0]).coefficient;
      weight = std::get<SeparableTerm>(spec.terms[0]).weight(0.0);
    } else {
      const auto& c = oracle_case(name);
      spec = c.spec;
      lambda = c.lambda;
      closed_form = c.closed_form;
      coefficient = c.coefficient();
    }
    const double oracle = weight * oracle_1d(coefficient, spec.p, lambda);
    Matrix L(1, 1);
    L(0, 0) = lambda;
    const auto sol = solve_cell(spec, 0.0, L, CellGrid(1, 1, e.cell.nodes_per_period), e.cell.options);
    const double rel = std::abs(sol.value - oracle) / std::max(std::abs(oracle), 1e-300);
    worst = std::max(worst, rel);
    if (!(rel <= e.tolerance)) agree.pass = false;
    if (!std::isnan(closed_form) &&
        !(std::abs(oracle - closed_form) <= 1e-8 * std::max(1.0, std::abs(closed_form))))
      closed.pass = false;
    os << name << "," << format_double(lambda) << "," << format_double(oracle) << ",";
    if (std::isnan(closed_form))
      os << "nan";
    else
      os << format_double(closed_form);
    os << "," << format_double(sol.value) << "," << format_double(rel) << "\n";
  }
  agree.detail = "max relative gap " + format_double(worst);
  out.rows_file = art.relative("rows.csv");
  out.verdicts = {agree, closed};
  out.summary = agree.detail;
}

void run_growth(const ExperimentConfig& e, Artifacts& art, ExperimentOutcome& out) {
  const auto report = check_growth(e.integrand, e.samples, e.seed, e.spacetime.horizon);
  auto os = art.open("violations.csv");
  os << "t,lambda_norm,value,lower,upper,margin,bound\n";
  for (const auto& v : report.violations)
    os << format_double(v.t) << "," << format_double(v.lambda.norm()) << "," << format_double(v.value)
       << "," << format_double(v.lower) << "," << format_double(v.upper) << ","
       << format_double(v.margin) << "," << (v.lower_failed ? "lower" : "upper") << "\n";
  out.rows_file = art.relative("violations.csv");
  out.verdicts.push_back({"zero_violations", report.passed(),
                          std::to_string(report.violations.size()) + " of " +
                              std::to_string(report.samples) + " samples"});
  out.summary = out.verdicts.back().detail;
}

void run_layered(const ExperimentConfig& e, Artifacts& art, ExperimentOutcome& out) {
  const Domain omega = e.spacetime.domain();
  const int n = omega.dim();
  const auto grid = std::make_shared<const SpaceTimeGrid>(
      omega, std::vector<int>(n, e.grid_cells), e.spacetime.horizon, e.spacetime.time_steps);
  const auto u = SpaceTimeField::from_function(
      grid, 1, [](std::span<const double> x, double, std::span<double> o) {
        double s = 0.0;
        for (double v : x) s += v * v;
        o[0] = s;
      });
  std::vector<Box> partition = omega.boxes();
  std::vector<double> errors;
  auto os = art.open("rows.csv");
  os << "level,pieces,error\n";
  for (int level = 0; level < e.levels; ++level) {
    const auto proj = layered_project(u, partition, e.p_norm);
    errors.push_back(proj.error);
    os << level << "," << partition.size() << "," << format_double(proj.error) << "\n";
    if (level + 1 < e.levels) partition = refine_partition(partition);
  }
  out.rows_file = art.relative("rows.csv");
  Verdict mono{"error_nonincreasing", true, ""};
  for (std::size_t i = 1; i < errors.size(); ++i)
    if (errors[i] > errors[i - 1] + 1e-12) mono.pass = false;
  const double ratio = errors.front() > 0.0 ? errors.back() / errors.front() : 0.0;
  out.verdicts = {mono, {"final_ratio", ratio <= e.tolerance, "ratio " + format_double(ratio)}};
  out.summary = "level-0 error " + format_double(errors.front()) + ", final ratio " + format_double(ratio);
}

}  // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& e, const fs::path& out_dir,
                                 unsigned threads) {
  ExperimentOutcome out;
  out.id = e.id;
  out.kind = to_string(e.kind);
  out.tolerances["tolerance"] = e.tolerance;
  if (e.kind == ExperimentKind::convexity) out.tolerances["convexity_tol"] = e.convexity_tol;
  if (e.kind != ExperimentKind::layered && e.kind != ExperimentKind::growth)
    out.tolerances["gradient_tolerance"] = e.cell.options.gradient_tolerance;
  try {
    Artifacts art(out_dir, e.id, out);
    switch (e.kind) {
      case ExperimentKind::cell_solve: run_cell_solve(e, art, out); break;
      case ExperimentKind::tabulate: run_tabulate(e, art, out, threads); break;
      case ExperimentKind::recovery: run_recovery(e, art, out, threads); break;
      case ExperimentKind::gamma_min: run_gamma_min(e, art, out, threads); break;
      case ExperimentKind::convexity: run_convexity(e, art, out, threads); break;
      case ExperimentKind::oracle_compare: run_oracle_compare(e, art, out); break;
      case ExperimentKind::growth: run_growth(e, art, out); break;
      case ExperimentKind::layered: run_layered(e, art, out); break;
    }
    const bool ok = std::all_of(out.verdicts.begin(), out.verdicts.end(),
                                [](const Verdict& v) { return v.pass; });
    out.status = ok ? ExperimentOutcome::Status::pass : ExperimentOutcome::Status::fail;
  } catch (const std::exception& ex) {
    out.status = ExperimentOutcome::Status::error;
    out.message = ex.what();
  }
  return out;
}

SuiteReport run_suite(const RunConfig& config, const fs::path& out_dir,
                      const SuiteOptions& options, std::optional<ExperimentKind> only) {
  fs::create_directories(out_dir);
  SuiteReport report;
  for (const auto& e : config.experiments) {
    if (only && e.kind != *only) continue;
    auto outcome = run_experiment(e, out_dir, options.threads);
    if (options.log != nullptr) {
      *options.log << outcome.id << " [" << outcome.kind << "] " << to_string(outcome.status);
      if (!outcome.summary.empty()) *options.log << ": " << outcome.summary;
      if (!outcome.message.empty()) *options.log << ": " << outcome.message;
      *options.log << "\n";
    }
    report.experiments.push_back(std::move(outcome));
  }
  std::ofstream os(out_dir / "suite_report.json", std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot write " + (out_dir / "suite_report.json").string());
  write_suite_report(os, report);
  return report;
}

void write_suite_report(std::ostream& os, const SuiteReport& report) {
  nlohmann::json root;
  root["verdict"] = report.passed() ? "pass" : "fail";
  root["experiments"] = nlohmann::json::array();
  for (const auto& e : report.experiments) {
    nlohmann::json j;
    j["id"] = e.id;
    j["kind"] = e.kind;
    j["verdict"] = to_string(e.status);
    j["rows_file"] = e.rows_file;
    j["files"] = e.files;
    j["tolerances"] = e.tolerances;
    j["message"] = e.message;
    j["checks"] = nlohmann::json::array();
    for (const auto& v : e.verdicts)
      j["checks"].push_back({{"name", v.name}, {"pass", v.pass}, {"detail", v.detail}});
    root["experiments"].push_back(std::move(j));
  }
  os << root.dump(2) << "\n";
}

}  // namespace parahom
