#include "parahom/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "parahom/experiment.hpp"

namespace parahom {

namespace {

using Kind = ConfigError::Kind;

int line_of(const YAML::Node& node) {
  const auto mark = node.Mark();
  return mark.line >= 0 ? mark.line + 1 : -1;
}

[[noreturn]] void fail(Kind kind, const YAML::Node& node, const std::string& message) {
  const int line = line_of(node);
  std::string text = message;
  if (line > 0) text = "line " + std::to_string(line) + ": " + text;
  throw ConfigError(kind, text, line);
}

void require_map(const YAML::Node& node, const std::string& where) {
  if (!node.IsMap()) fail(Kind::syntax, node, where + " must be a mapping");
}

void check_keys(const YAML::Node& node, const std::set<std::string>& allowed,
                const std::string& where) {
  require_map(node, where);
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) fail(Kind::unknown_key, kv.first, "unknown key '" + key + "' in " + where);
  }
}

template <class T>
T scalar(const YAML::Node& node, const std::string& what) {
  if (!node.IsScalar()) fail(Kind::syntax, node, what + " must be a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(Kind::syntax, node, "malformed value for " + what);
  }
}

std::vector<double> number_list(const YAML::Node& node, const std::string& what) {
  if (node.IsScalar()) return {scalar<double>(node, what)};
  if (!node.IsSequence()) fail(Kind::syntax, node, what + " must be a list of numbers");
  std::vector<double> out;
  for (const auto& item : node) out.push_back(scalar<double>(item, what));
  return out;
}

std::vector<int> int_list(const YAML::Node& node, const std::string& what) {
  if (node.IsScalar()) return {scalar<int>(node, what)};
  if (!node.IsSequence()) fail(Kind::syntax, node, what + " must be a list of integers");
  std::vector<int> out;
  for (const auto& item : node) out.push_back(scalar<int>(item, what));
  return out;
}

/// A number (1 x 1), a flat list (1 x n) or a list of rows.
Matrix matrix_value(const YAML::Node& node, const std::string& what) {
  if (node.IsScalar()) {
    Matrix M(1, 1);
    M(0, 0) = scalar<double>(node, what);
    return M;
  }
  if (!node.IsSequence() || node.size() == 0) fail(Kind::syntax, node, what + " must be a matrix");
  if (!node[0].IsSequence()) {
    const auto row = number_list(node, what);
    Matrix M(1, row.size());
    for (std::size_t j = 0; j < row.size(); ++j) M(0, j) = row[j];
    return M;
  }
  std::vector<std::vector<double>> rows;
  for (const auto& r : node) rows.push_back(number_list(r, what));
  for (const auto& r : rows)
    if (r.size() != rows[0].size()) fail(Kind::invariant, node, what + " rows differ in length");
  Matrix M(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) M(i, j) = rows[i][j];
  return M;
}

void invariant(bool ok, const YAML::Node& node, const std::string& message) {
  if (!ok) fail(Kind::invariant, node, message);
}

// ---------------------------------------------------------------------------
// Integrand
// ---------------------------------------------------------------------------

CoefficientField parse_coefficient(const YAML::Node& node) {
  require_map(node, "coefficient");
  if (!node["kind"]) fail(Kind::invariant, node, "coefficient needs a kind");
  const auto kind = scalar<std::string>(node["kind"], "coefficient kind");
  auto num = [&](const char* key, double fallback) {
    return node[key] ? scalar<double>(node[key], key) : fallback;
  };
  auto axis = [&]() { return node["axis"] ? scalar<int>(node["axis"], "axis") : 0; };
  if (kind == "constant") {
    check_keys(node, {"kind", "value"}, "coefficient");
    return ConstantField{num("value", 1.0)};
  }
  if (kind == "sinusoidal") {
    check_keys(node, {"kind", "mean", "amplitude", "axis"}, "coefficient");
    return SinusoidalField{num("mean", 2.0), num("amplitude", 1.0), axis()};
  }
  if (kind == "laminate") {
    check_keys(node, {"kind", "alpha", "beta", "fraction", "axis"}, "coefficient");
    return LaminateField{num("alpha", 1.0), num("beta", 4.0), num("fraction", 0.5), axis()};
  }
  if (kind == "checkerboard") {
    check_keys(node, {"kind", "alpha", "beta"}, "coefficient");
    return CheckerboardField{num("alpha", 1.0), num("beta", 4.0)};
  }
  fail(Kind::invariant, node["kind"], "unknown coefficient kind '" + kind + "'");
}

IntegrandTerm parse_term(const YAML::Node& node) {
  require_map(node, "term");
  if (!node["kind"]) fail(Kind::invariant, node, "term needs a kind");
  const auto kind = scalar<std::string>(node["kind"], "term kind");
  if (!node["coefficient"]) fail(Kind::invariant, node, "term needs a coefficient");
  if (kind == "separable") {
    check_keys(node, {"kind", "coefficient", "weight"}, "separable term");
    SeparableTerm term{parse_coefficient(node["coefficient"]), {}};
    if (const auto w = node["weight"]) {
      check_keys(w, {"base", "amplitude", "frequency"}, "weight");
      if (w["base"]) term.weight.base = scalar<double>(w["base"], "base");
      if (w["amplitude"]) term.weight.amplitude = scalar<double>(w["amplitude"], "amplitude");
      if (w["frequency"]) term.weight.frequency = scalar<double>(w["frequency"], "frequency");
    }
    return term;
  }
  if (kind == "double_well" || kind == "double-well") {
    check_keys(node, {"kind", "coefficient", "well", "c0"}, "double-well term");
    if (!node["well"]) fail(Kind::invariant, node, "double-well term needs a well");
    DoubleWellTerm term;
    term.coefficient = parse_coefficient(node["coefficient"]);
    term.well = matrix_value(node["well"], "well");
    term.c0 = node["c0"] ? scalar<double>(node["c0"], "c0") : 1.0;
    return term;
  }
  fail(Kind::invariant, node["kind"], "unknown term kind '" + kind + "'");
}

void parse_integrand(const YAML::Node& node, IntegrandSpec& spec) {
  check_keys(node, {"m", "n", "p", "C1", "C2", "cells_per_period", "terms"}, "integrand");
  if (node["m"]) spec.m = scalar<int>(node["m"], "m");
  if (node["n"]) spec.n = scalar<int>(node["n"], "n");
  if (node["p"]) spec.p = scalar<double>(node["p"], "p");
  if (node["C1"]) spec.C1 = scalar<double>(node["C1"], "C1");
  if (node["C2"]) spec.C2 = scalar<double>(node["C2"], "C2");
  if (node["cells_per_period"])
    spec.cells_per_period = scalar<int>(node["cells_per_period"], "cells_per_period");
  if (const auto terms = node["terms"]) {
    if (!terms.IsSequence()) fail(Kind::syntax, terms, "terms must be a list");
    spec.terms.clear();
    for (const auto& t : terms) spec.terms.push_back(parse_term(t));
  }
  try {
    spec.validate();
  } catch (const Error& e) {
    fail(Kind::invariant, node, e.what());
  }
}

// ---------------------------------------------------------------------------
// Grids
// ---------------------------------------------------------------------------

void parse_cell(const YAML::Node& node, CellConfig& cell) {
  check_keys(node,
             {"nodes_per_period", "k_list", "max_iterations", "gradient_tolerance", "multistart",
              "history", "value_gap"},
             "cell");
  if (node["nodes_per_period"])
    cell.nodes_per_period = scalar<int>(node["nodes_per_period"], "nodes_per_period");
  if (node["k_list"]) cell.k_list = int_list(node["k_list"], "k_list");
  auto& o = cell.options;
  if (node["max_iterations"]) o.max_iterations = scalar<int>(node["max_iterations"], "max_iterations");
  if (node["gradient_tolerance"])
    o.gradient_tolerance = scalar<double>(node["gradient_tolerance"], "gradient_tolerance");
  if (node["multistart"]) o.multistart_count = scalar<int>(node["multistart"], "multistart");
  if (node["history"]) o.history = scalar<int>(node["history"], "history");
  if (node["value_gap"]) o.value_gap = scalar<double>(node["value_gap"], "value_gap");
  invariant(cell.nodes_per_period >= 2, node, "nodes_per_period must be at least 2");
  invariant(!cell.k_list.empty(), node, "k_list must not be empty");
  for (std::size_t i = 0; i < cell.k_list.size(); ++i) {
    invariant(cell.k_list[i] >= 1, node, "k values must be positive");
    invariant(i == 0 || cell.k_list[i] > cell.k_list[i - 1], node, "k_list must be ascending");
  }
  try {
    o.validate();
  } catch (const Error& e) {
    fail(Kind::invariant, node, e.what());
  }
}

Box parse_box(const YAML::Node& node) {
  check_keys(node, {"lower", "upper"}, "box");
  if (!node["lower"] || !node["upper"]) fail(Kind::invariant, node, "box needs lower and upper");
  Box b{number_list(node["lower"], "lower"), number_list(node["upper"], "upper")};
  invariant(b.lower.size() == b.upper.size(), node, "box corners differ in dimension");
  for (std::size_t a = 0; a < b.lower.size(); ++a)
    invariant(b.lower[a] < b.upper[a], node, "box lower corner must lie below the upper corner");
  return b;
}

void parse_spacetime(const YAML::Node& node, SpaceTimeConfig& st) {
  check_keys(node, {"lower", "upper", "boxes", "holes", "horizon", "time_steps", "cells_per_eps"},
             "spacetime");
  if (node["boxes"] && (node["lower"] || node["upper"]))
    fail(Kind::invariant, node, "give either boxes or lower/upper, not both");
  if (node["lower"] || node["upper"]) {
    if (!node["lower"] || !node["upper"]) fail(Kind::invariant, node, "spacetime needs lower and upper");
    st.boxes = {Box{number_list(node["lower"], "lower"), number_list(node["upper"], "upper")}};
    invariant(st.boxes[0].lower.size() == st.boxes[0].upper.size(), node,
              "box corners differ in dimension");
  }
  if (const auto boxes = node["boxes"]) {
    if (!boxes.IsSequence() || boxes.size() == 0) fail(Kind::syntax, boxes, "boxes must be a list");
    st.boxes.clear();
    for (const auto& b : boxes) st.boxes.push_back(parse_box(b));
  }
  if (const auto holes = node["holes"]) {
    if (!holes.IsSequence()) fail(Kind::syntax, holes, "holes must be a list");
    st.holes.clear();
    for (const auto& h : holes) {
      check_keys(h, {"center", "radius"}, "hole");
      if (!h["center"] || !h["radius"]) fail(Kind::invariant, h, "hole needs center and radius");
      st.holes.push_back(Ball{number_list(h["center"], "center"), scalar<double>(h["radius"], "radius")});
    }
  }
  if (node["horizon"]) st.horizon = scalar<double>(node["horizon"], "horizon");
  if (node["time_steps"]) st.time_steps = scalar<int>(node["time_steps"], "time_steps");
  if (node["cells_per_eps"]) st.cells_per_eps = scalar<int>(node["cells_per_eps"], "cells_per_eps");
  invariant(st.horizon > 0.0, node, "horizon must be positive");
  invariant(st.time_steps >= 1, node, "time_steps must be at least 1");
  invariant(st.cells_per_eps >= 0, node, "cells_per_eps must be nonnegative");
  try {
    (void)st.domain();
  } catch (const Error& e) {
    fail(Kind::invariant, node, e.what());
  }
}

std::vector<double> parse_axis(const YAML::Node& node) {
  if (node.IsMap()) {
    check_keys(node, {"min", "max", "count"}, "lambda axis");
    if (!node["min"] || !node["max"] || !node["count"])
      fail(Kind::invariant, node, "lambda axis range needs min, max and count");
    const double lo = scalar<double>(node["min"], "min");
    const double hi = scalar<double>(node["max"], "max");
    const int count = scalar<int>(node["count"], "count");
    invariant(count >= 1, node, "axis count must be positive");
    invariant(count == 1 ? lo == hi : lo < hi, node, "axis range must be ascending");
    std::vector<double> axis(count);
    for (int i = 0; i < count; ++i)
      axis[i] = count == 1 ? lo : lo + (hi - lo) * (static_cast<double>(i) / (count - 1));
    return axis;
  }
  return number_list(node, "lambda axis");
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

std::set<std::string> allowed_experiment_keys(ExperimentKind kind) {
  std::set<std::string> keys{"id", "kind", "seed", "tolerance", "integrand", "cell", "spacetime"};
  auto add = [&](std::initializer_list<const char*> extra) { keys.insert(extra.begin(), extra.end()); };
  switch (kind) {
    case ExperimentKind::cell_solve: add({"lambda", "t"}); break;
    case ExperimentKind::tabulate: add({"t_grid", "lambda_axes", "ray"}); break;
    case ExperimentKind::recovery: add({"lambda", "offset", "eps_inverse"}); break;
    case ExperimentKind::gamma_min: add({"lambda", "offset", "eps_inverse", "with_recovery"}); break;
    case ExperimentKind::convexity:
      add({"t_grid", "lambda_axes", "ray", "segment_samples", "convexity_tol", "raw_point"});
      break;
    case ExperimentKind::oracle_compare: add({"cases", "lambda"}); break;
    case ExperimentKind::growth: add({"samples"}); break;
    case ExperimentKind::layered: add({"levels", "grid_cells", "p_norm"}); break;
  }
  return keys;
}

ExperimentConfig parse_experiment(const YAML::Node& node, const RunConfig& run,
                                  std::size_t index) {
  require_map(node, "experiment");
  if (!node["kind"]) fail(Kind::invariant, node, "experiment needs a kind");
  const auto kind_text = scalar<std::string>(node["kind"], "kind");
  const auto kind = parse_experiment_kind(kind_text);
  if (!kind) fail(Kind::invariant, node["kind"], "unknown experiment kind '" + kind_text + "'");
  check_keys(node, allowed_experiment_keys(*kind), "experiment '" + kind_text + "'");

  ExperimentConfig e;
  e.kind = *kind;
  e.id = node["id"] ? scalar<std::string>(node["id"], "id")
                    : to_string(*kind) + "-" + std::to_string(index);
  invariant(!e.id.empty() && std::all_of(e.id.begin(), e.id.end(),
                                         [](char c) {
                                           return std::isalnum(static_cast<unsigned char>(c)) ||
                                                  c == '-' || c == '_';
                                         }),
            node, "experiment id must use letters, digits, '-' or '_'");
  e.integrand = run.integrand;
  e.cell = run.cell;
  e.spacetime = run.spacetime;
  e.seed = node["seed"] ? scalar<std::uint64_t>(node["seed"], "seed") : run.seed;
  if (node["integrand"]) parse_integrand(node["integrand"], e.integrand);
  if (node["cell"]) parse_cell(node["cell"], e.cell);
  if (node["spacetime"]) parse_spacetime(node["spacetime"], e.spacetime);
  e.cell.options.seed = e.seed;

  switch (e.kind) {
    case ExperimentKind::oracle_compare: e.tolerance = 1e-3; break;
    case ExperimentKind::layered: e.tolerance = 0.25; break;
    default: break;
  }
  if (node["tolerance"]) e.tolerance = scalar<double>(node["tolerance"], "tolerance");
  invariant(e.tolerance > 0.0, node, "tolerance must be positive");

  const bool needs_integrand = e.kind != ExperimentKind::layered &&
                               e.kind != ExperimentKind::oracle_compare;
  if (needs_integrand) {
    invariant(!e.integrand.terms.empty(), node, "experiment needs an integrand");
  }
  const IntegrandSpec& spec = e.integrand;

  if (node["lambda"]) e.lambda = matrix_value(node["lambda"], "lambda");
  if (node["t"]) e.t = scalar<double>(node["t"], "t");
  if (node["offset"]) {
    const auto v = number_list(node["offset"], "offset");
    e.offset = Eigen::Map<const Vector>(v.data(), v.size());
  }
  if (node["with_recovery"]) e.with_recovery = scalar<bool>(node["with_recovery"], "with_recovery");
  if (node["t_grid"]) e.t_grid = number_list(node["t_grid"], "t_grid");
  if (node["segment_samples"])
    e.segment_samples = scalar<int>(node["segment_samples"], "segment_samples");
  if (node["convexity_tol"]) e.convexity_tol = scalar<double>(node["convexity_tol"], "convexity_tol");
  if (node["raw_point"]) e.raw_point = number_list(node["raw_point"], "raw_point");
  if (node["samples"]) e.samples = scalar<std::size_t>(node["samples"], "samples");
  if (node["levels"]) e.levels = scalar<int>(node["levels"], "levels");
  if (node["grid_cells"]) e.grid_cells = scalar<int>(node["grid_cells"], "grid_cells");
  if (node["p_norm"]) e.p_norm = scalar<double>(node["p_norm"], "p_norm");
  if (const auto c = node["cases"]) {
    if (c.IsScalar())
      e.cases = {scalar<std::string>(c, "cases")};
    else if (c.IsSequence())
      for (const auto& item : c) e.cases.push_back(scalar<std::string>(item, "case"));
    else
      fail(Kind::syntax, c, "cases must be a list of names");
  }
  if (const auto inv = node["eps_inverse"]) {
    const auto ks = int_list(inv, "eps_inverse");
    invariant(!ks.empty(), inv, "eps_inverse must not be empty");
    for (std::size_t i = 0; i < ks.size(); ++i) {
      invariant(ks[i] >= 1, inv, "eps_inverse entries must be positive integers");
      invariant(i == 0 || ks[i] > ks[i - 1], inv, "eps_inverse must be strictly increasing");
      e.eps_list.push_back(1.0 / ks[i]);
    }
  }
  if (node["lambda_axes"] && node["ray"]) fail(Kind::invariant, node, "give lambda_axes or ray, not both");
  if (const auto axes = node["lambda_axes"]) {
    if (!axes.IsSequence()) fail(Kind::syntax, axes, "lambda_axes must be a list of axes");
    std::vector<std::vector<double>> list;
    for (const auto& a : axes) list.push_back(parse_axis(a));
    try {
      e.lambda_grid = LambdaGrid::tensor(spec.m, spec.n, std::move(list));
    } catch (const Error& err) {
      fail(Kind::invariant, axes, err.what());
    }
  }
  if (const auto ray = node["ray"]) {
    check_keys(ray, {"direction", "scales"}, "ray");
    if (!ray["direction"] || !ray["scales"]) fail(Kind::invariant, ray, "ray needs direction and scales");
    try {
      e.lambda_grid = LambdaGrid::ray(matrix_value(ray["direction"], "direction"),
                                      parse_axis(ray["scales"]));
    } catch (const Error& err) {
      fail(Kind::invariant, ray, err.what());
    }
    invariant(e.lambda_grid->rows() == spec.m && e.lambda_grid->cols() == spec.n, ray,
              "ray direction must be m x n");
  }

  // Kind-specific invariants.
  const bool needs_lambda = e.kind == ExperimentKind::cell_solve ||
                            e.kind == ExperimentKind::recovery ||
                            e.kind == ExperimentKind::gamma_min;
  if (needs_lambda) {
    invariant(e.lambda.size() > 0, node, "experiment needs lambda");
    invariant(e.lambda.rows() == spec.m && e.lambda.cols() == spec.n, node["lambda"],
              "lambda must be an m x n matrix");
  }
  if (e.kind == ExperimentKind::recovery || e.kind == ExperimentKind::gamma_min) {
    invariant(!e.eps_list.empty(), node, "experiment needs eps_inverse");
    if (e.offset.size() == 0) e.offset = Vector::Zero(spec.m);
    invariant(e.offset.size() == spec.m, node, "offset must have m entries");
    invariant(e.spacetime.boxes.front().dim() == spec.n, node,
              "spacetime dimension must equal the integrand's n");
  }
  if (e.kind == ExperimentKind::tabulate || e.kind == ExperimentKind::convexity) {
    invariant(e.lambda_grid.has_value(), node, "experiment needs lambda_axes or ray");
    invariant(!e.t_grid.empty(), node, "t_grid must not be empty");
    for (std::size_t i = 1; i < e.t_grid.size(); ++i)
      invariant(e.t_grid[i] > e.t_grid[i - 1], node, "t_grid must be strictly ascending");
    invariant(e.segment_samples >= 1, node, "segment_samples must be positive");
    invariant(e.convexity_tol >= 0.0, node, "convexity_tol must be nonnegative");
    if (e.raw_point)
      invariant(static_cast<int>(e.raw_point->size()) == spec.n, node, "raw_point needs n entries");
  }
  if (e.kind == ExperimentKind::oracle_compare) {
    invariant(!e.cases.empty(), node, "oracle-compare needs cases");
    for (const auto& name : e.cases) {
      if (name == "config") {
        invariant(!spec.terms.empty() && spec.m == 1 && spec.n == 1, node,
                  "the config oracle case needs a one-dimensional integrand");
        invariant(e.lambda.size() == 1, node, "the config oracle case needs a scalar lambda");
        continue;
      }
      try {
        (void)oracle_case(name);
      } catch (const Error& err) {
        fail(Kind::invariant, node["cases"], err.what());
      }
    }
  }
  if (e.kind == ExperimentKind::growth) invariant(e.samples >= 1, node, "samples must be positive");
  if (e.kind == ExperimentKind::layered) {
    invariant(e.levels >= 1, node, "levels must be positive");
    invariant(e.grid_cells >= 2, node, "grid_cells must be at least 2");
    invariant(e.p_norm >= 1.0, node, "p_norm must be at least 1");
  }
  return e;
}

RunConfig parse_root(const YAML::Node& root) {
  RunConfig run;
  if (root.IsNull()) return run;
  check_keys(root, {"output", "seed", "integrand", "cell", "spacetime", "experiments"}, "config");
  if (root["output"]) run.output = scalar<std::string>(root["output"], "output");
  if (root["seed"]) run.seed = scalar<std::uint64_t>(root["seed"], "seed");
  if (root["integrand"]) parse_integrand(root["integrand"], run.integrand);
  if (root["cell"]) parse_cell(root["cell"], run.cell);
  if (root["spacetime"]) parse_spacetime(root["spacetime"], run.spacetime);
  run.cell.options.seed = run.seed;
  if (const auto list = root["experiments"]) {
    if (!list.IsSequence()) fail(Kind::syntax, list, "experiments must be a list");
    std::set<std::string> ids;
    for (std::size_t i = 0; i < list.size(); ++i) {
      auto e = parse_experiment(list[i], run, i);
      if (!ids.insert(e.id).second) fail(Kind::invariant, list[i], "duplicate experiment id '" + e.id + "'");
      run.experiments.push_back(std::move(e));
    }
  }
  return run;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::cell_solve: return "cell-solve";
    case ExperimentKind::tabulate: return "tabulate";
    case ExperimentKind::recovery: return "recovery";
    case ExperimentKind::gamma_min: return "gamma-min";
    case ExperimentKind::convexity: return "convexity";
    case ExperimentKind::oracle_compare: return "oracle-compare";
    case ExperimentKind::growth: return "growth";
    case ExperimentKind::layered: return "layered";
  }
  return "unknown";
}

std::optional<ExperimentKind> parse_experiment_kind(const std::string& text) {
  for (auto k : {ExperimentKind::cell_solve, ExperimentKind::tabulate, ExperimentKind::recovery,
                 ExperimentKind::gamma_min, ExperimentKind::convexity,
                 ExperimentKind::oracle_compare, ExperimentKind::growth, ExperimentKind::layered})
    if (to_string(k) == text) return k;
  return std::nullopt;
}

Domain SpaceTimeConfig::domain() const { return Domain(boxes, holes); }

GridFactory SpaceTimeConfig::grid_factory(int cells_per_period) const {
  const Domain omega = domain();
  const Box bb = omega.bounding_box();
  const int per_eps = cells_per_eps > 0 ? cells_per_eps : 4 * cells_per_period;
  const double T = horizon;
  const int M = time_steps;
  return [omega, bb, per_eps, T, M](double eps) {
    std::vector<int> cells(bb.dim());
    for (int a = 0; a < bb.dim(); ++a)
      cells[a] = std::max(
          1, static_cast<int>(std::ceil((bb.upper[a] - bb.lower[a]) * per_eps / eps - 1e-9)));
    return std::make_shared<const SpaceTimeGrid>(omega, cells, T, M);
  };
}

RunConfig parse_config_text(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    const int line = e.mark.line >= 0 ? e.mark.line + 1 : -1;
    throw ConfigError(Kind::syntax, "line " + std::to_string(line) + ": " + e.msg, line);
  }
  try {
    return parse_root(root);
  } catch (const ConfigError&) {
    throw;
  } catch (const YAML::Exception& e) {
    const int line = e.mark.line >= 0 ? e.mark.line + 1 : -1;
    throw ConfigError(Kind::syntax, e.what(), line);
  }
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in || std::filesystem::is_directory(path))
    throw ConfigError(Kind::missing_file, "cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

}  // namespace parahom
