#include "parahom/cli.hpp"

#include <CLI11.hpp>

#include <ostream>
#include <sstream>

#include "parahom/config.hpp"
#include "parahom/suite.hpp"

namespace parahom {

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_given = false;
  unsigned threads = 0;
  bool quiet = false;
  std::vector<double> lambda;
};

void add_common(CLI::App* sub, Flags& flags) {
  sub->add_option("--config", flags.config, "Config file")->required();
  sub->add_option("--out", flags.out, "Output directory (defaults to the config's output)");
  sub->add_option_function<std::uint64_t>(
      "--seed", [&flags](const std::uint64_t& s) { flags.seed = s, flags.seed_given = true; },
      "Override every experiment seed");
  sub->add_option("--threads", flags.threads, "Worker threads (0 = serial deterministic mode)");
  sub->add_flag("--quiet", flags.quiet, "Suppress progress output");
}

/// Usage problem detected after argument parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void apply_overrides(RunConfig& config, const Flags& flags, ExperimentKind kind) {
  if (flags.seed_given) {
    config.seed = flags.seed;
    config.cell.options.seed = flags.seed;
    for (auto& e : config.experiments) e.seed = flags.seed, e.cell.options.seed = flags.seed;
  }
  if (kind != ExperimentKind::cell_solve) {
    if (!flags.lambda.empty()) throw UsageError("--lambda only applies to cell-solve");
    return;
  }
  const bool has_cell_solve =
      std::any_of(config.experiments.begin(), config.experiments.end(),
                  [](const ExperimentConfig& e) { return e.kind == ExperimentKind::cell_solve; });
  if (!has_cell_solve) {
    if (config.integrand.terms.empty())
      throw UsageError("config defines no integrand for cell-solve");
    ExperimentConfig e;
    e.id = "cell-solve";
    e.kind = ExperimentKind::cell_solve;
    e.integrand = config.integrand;
    e.cell = config.cell;
    e.spacetime = config.spacetime;
    e.seed = config.seed;
    e.lambda = Matrix::Zero(config.integrand.m, config.integrand.n);
    config.experiments.push_back(std::move(e));
  }
  if (flags.lambda.empty()) return;
  for (auto& e : config.experiments) {
    if (e.kind != ExperimentKind::cell_solve) continue;
    const int m = e.integrand.m, n = e.integrand.n;
    if (static_cast<int>(flags.lambda.size()) != m * n)
      throw UsageError("--lambda needs m*n = " + std::to_string(m * n) + " values");
    e.lambda.resize(m, n);
    for (int i = 0; i < m * n; ++i) e.lambda(i / n, i % n) = flags.lambda[i];
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical periodic homogenization of parabolic integral functionals"};
  app.require_subcommand(1);
  Flags flags;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"cell-solve", "Solve the cell problem at one gradient"},
      {"tabulate", "Tabulate the homogenized density"},
      {"recovery", "Recovery-sequence convergence table"},
      {"gamma-min", "Convergence of Dirichlet minima"},
      {"convexity", "Midpoint-convexity probe of the homogenized density"},
      {"oracle-compare", "Compare cell solves with one-dimensional closed forms"},
      {"suite", "Run every configured experiment"}};
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    add_common(sub, flags);
    if (name == "cell-solve")
      sub->add_option("--lambda", flags.lambda, "Gradient entries, row-major")->expected(1, -1);
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return 2;
  }

  const auto* chosen = app.get_subcommands().front();
  const std::string command = chosen->get_name();
  std::optional<ExperimentKind> only;
  if (command != "suite") only = parse_experiment_kind(command);

  RunConfig config;
  try {
    config = parse_config(flags.config);
    if (only) apply_overrides(config, flags, *only);
    else apply_overrides(config, flags, ExperimentKind::tabulate);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }
  if (only && std::none_of(config.experiments.begin(), config.experiments.end(),
                           [&](const ExperimentConfig& e) { return e.kind == *only; })) {
    err << "usage error: config has no " << command << " experiments\n";
    return 2;
  }

  const std::string out_dir = flags.out.empty() ? config.output : flags.out;
  SuiteOptions options;
  options.threads = flags.threads;
  options.log = flags.quiet ? nullptr : &out;
  SuiteReport report;
  try {
    report = run_suite(config, out_dir, options, only);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  for (const auto& e : report.experiments) {
    if (e.status == ExperimentOutcome::Status::error)
      err << e.id << ": " << e.message << "\n";
    for (const auto& v : e.verdicts)
      if (!v.pass) err << e.id << ": check " << v.name << " failed " << v.detail << "\n";
  }
  return report.passed() ? 0 : 1;
}

}  // namespace parahom
