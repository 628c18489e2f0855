#include "parahom/cell.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "parahom/errors.hpp"
#include "parahom/nodal_energy.hpp"
#include "parahom/util.hpp"

namespace parahom {

void CellSolveOptions::validate() const {
  if (max_iterations < 1) throw InvalidInput("max_iterations must be positive");
  if (!(gradient_tolerance > 0.0)) throw InvalidInput("gradient_tolerance must be positive");
  if (multistart_count < 1) throw InvalidInput("multistart_count must be at least 1");
  if (history < 1) throw InvalidInput("history must be positive");
  if (!(armijo > 0.0 && armijo < 1.0)) throw InvalidInput("armijo must lie in (0, 1)");
  if (!(backtrack > 0.0 && backtrack < 1.0)) throw InvalidInput("backtrack must lie in (0, 1)");
  if (value_gap < 0.0) throw InvalidInput("value_gap must be nonnegative");
}

std::string CellSolveOptions::canonical() const {
  std::ostringstream os;
  os << "it=" << max_iterations << ";tol=" << format_double(gradient_tolerance)
     << ";ms=" << multistart_count << ";hist=" << history << ";arm=" << format_double(armijo)
     << ";bt=" << format_double(backtrack) << ";gap=" << format_double(value_gap)
     << ";seed=" << seed;
  return os.str();
}

std::vector<Index> cell_interior_nodes(const CellGrid& grid) {
  std::vector<Index> nodes;
  const auto& mesh = grid.mesh();
  for (Index node = 0; node < mesh.node_count(); ++node)
    if (!mesh.on_bounding_boundary(node)) nodes.push_back(node);
  return nodes;
}

namespace {

void check_cell_inputs(const IntegrandSpec& spec, const Matrix& lambda,
                       const CorrectorField& corrector) {
  if (corrector.grid().dim() != spec.n || corrector.components() != spec.m)
    throw DimensionMismatch("corrector grid does not match the integrand dimensions");
  if (lambda.rows() != spec.m || lambda.cols() != spec.n)
    throw DimensionMismatch("lambda must be an m x n matrix");
  if (!lambda.allFinite()) throw InvalidInput("non-finite lambda");
}

NodalProblem cell_problem(const IntegrandSpec& spec, double t, const Matrix& lambda,
                          const CellGrid& grid) {
  const auto& mesh = grid.mesh();
  NodalProblem p;
  p.spec = &spec;
  p.mesh = &mesh;
  p.m = spec.m;
  p.t = t;
  p.offset = lambda;
  p.cells.resize(mesh.cell_count());
  p.cell_points.resize(mesh.cell_count() * mesh.dim());
  for (Index c = 0; c < mesh.cell_count(); ++c) {
    p.cells[c] = c;
    mesh.cell_midpoint(c, std::span<double>(p.cell_points).subspan(c * mesh.dim(), mesh.dim()));
  }
  p.cell_weight = 1.0 / static_cast<double>(mesh.cell_count());
  p.free_nodes = cell_interior_nodes(grid);
  p.fixed_values.assign(mesh.node_count() * spec.m, 0.0);
  return p;
}

// Laminate-type start: along `axis` the corrector is a sawtooth whose slope is
// A (1 - theta) on the first J cells and -A theta on the remaining ones, so
// lambda + D phi visits two gradient states with volume fractions theta and
// 1 - theta. Small seeded noise is added at interior nodes.
std::vector<double> laminate_start(const IntegrandSpec& spec, const Matrix& lambda,
                                   const CellGrid& grid, int start, int count,
                                   std::uint64_t seed) {
  const auto& mesh = grid.mesh();
  const int m = spec.m;
  const int axis = (start - 1) % spec.n;
  const int L = mesh.cells_along(axis);
  const double h = mesh.spacing(axis);
  std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(start)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  int J = static_cast<int>(std::lround(static_cast<double>(start) / count * L));
  J = std::clamp(J, 1, std::max(1, L - 1));
  const double theta = static_cast<double>(J) / L;

  Vector e = Vector::Zero(m);
  for (const auto& term : spec.terms) {
    if (const auto* d = std::get_if<DoubleWellTerm>(&term)) {
      if (d->well.col(axis).norm() > 0.0) {
        e = d->well.col(axis).normalized();
        break;
      }
    }
  }
  if (e.norm() == 0.0 && lambda.col(axis).norm() > 0.0) e = lambda.col(axis).normalized();
  if (e.norm() == 0.0) e[0] = 1.0;

  double A = (1.0 + unit(rng)) * (lambda.norm() + spec.well_scale());
  if (A == 0.0) A = 1.0 + unit(rng);

  std::vector<double> profile(L + 1, 0.0);
  for (int i = 0; i < L; ++i)
    profile[i + 1] = profile[i] + h * (i < J ? A * (1.0 - theta) : -A * theta);
  profile[L] = 0.0;

  std::vector<double> full(mesh.node_count() * m, 0.0);
  std::vector<int> multi(mesh.dim());
  const double noise = 1e-3 * A * h;
  for (Index node = 0; node < mesh.node_count(); ++node) {
    if (mesh.on_bounding_boundary(node)) continue;
    mesh.node_multi_index(node, multi);
    for (int i = 0; i < m; ++i)
      full[node * m + i] = profile[multi[axis]] * e[i] + noise * (2.0 * unit(rng) - 1.0);
  }
  return full;
}

}  // namespace

double assemble_cell_energy(const IntegrandSpec& spec, double t, const Matrix& lambda,
                            const CorrectorField& corrector) {
  check_cell_inputs(spec, lambda, corrector);
  NodalEnergy energy(cell_problem(spec, t, lambda, corrector.grid()));
  return energy.value(energy.restrict_to_free(corrector.values()));
}

std::vector<double> assemble_cell_gradient(const IntegrandSpec& spec, double t,
                                           const Matrix& lambda, const CorrectorField& corrector) {
  check_cell_inputs(spec, lambda, corrector);
  NodalEnergy energy(cell_problem(spec, t, lambda, corrector.grid()));
  std::vector<double> grad(energy.size());
  energy.value_and_gradient(energy.restrict_to_free(corrector.values()), grad);
  return grad;
}

CellSolution solve_cell(const IntegrandSpec& spec, double t, const Matrix& lambda,
                        const CellGrid& grid, const CellSolveOptions& options,
                        std::span<const CorrectorField> warm_starts) {
  spec.validate();
  options.validate();
  if (grid.dim() != spec.n) throw DimensionMismatch("cell grid dimension does not match n");
  if (lambda.rows() != spec.m || lambda.cols() != spec.n)
    throw DimensionMismatch("lambda must be an m x n matrix");
  if (!lambda.allFinite() || !std::isfinite(t)) throw InvalidInput("non-finite cell-problem input");

  NodalEnergy energy(cell_problem(spec, t, lambda, grid));
  const auto precond = energy.laplace_preconditioner();
  const Objective objective = [&energy](std::span<const double> x, std::span<double> g) {
    return energy.value_and_gradient(x, g);
  };

  MinimizerOptions mopt;
  mopt.max_iterations = options.max_iterations;
  mopt.gradient_tolerance =
      options.gradient_tolerance * (1.0 + std::pow(lambda.norm(), spec.p - 1.0));
  mopt.history = options.history;
  mopt.armijo = options.armijo;
  mopt.backtrack = options.backtrack;
  mopt.value_gap = options.value_gap;

  std::vector<std::vector<double>> starts;
  starts.emplace_back(energy.size(), 0.0);
  for (int s = 1; s < options.multistart_count; ++s)
    starts.push_back(energy.restrict_to_free(
        laminate_start(spec, lambda, grid, s, options.multistart_count, options.seed)));
  for (const auto& warm : warm_starts) {
    if (!(warm.grid() == grid) || warm.components() != spec.m)
      throw DimensionMismatch("warm start lives on a different cell grid");
    starts.push_back(energy.restrict_to_free(warm.values()));
  }

  MinimizerResult best;
  int best_index = -1;
  int iterations = 0;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    MinimizerResult r = minimize_lbfgs(objective, std::move(starts[s]), mopt, precond);
    iterations += r.iterations;
    if (best_index < 0 || r.value < best.value) {
      best = std::move(r);
      best_index = static_cast<int>(s);
    }
  }

  CellSolution solution{best.value, CorrectorField(grid, spec.m, energy.expand(best.x)),
                        iterations, best.residual, best.stationary, best_index, best.value_gap};
  return solution;
}

CellGridFactory uniform_cell_grids(int n, int nodes_per_period) {
  return [n, nodes_per_period](int k) { return CellGrid(n, k, nodes_per_period); };
}

const CellSolution& HomogenizedDensity::best() const {
  const auto it = std::find(k_values.begin(), k_values.end(), best_k);
  return per_k[static_cast<std::size_t>(it - k_values.begin())];
}

HomogenizedDensity homogenized_density(const IntegrandSpec& spec, double t, const Matrix& lambda,
                                       const std::vector<int>& k_list,
                                       const CellGridFactory& grid_factory,
                                       const CellSolveOptions& options) {
  if (k_list.empty()) throw InvalidInput("k_list must not be empty");
  for (std::size_t i = 0; i < k_list.size(); ++i) {
    if (k_list[i] < 1) throw InvalidInput("k values must be positive");
    if (i > 0 && k_list[i] <= k_list[i - 1]) throw InvalidInput("k_list must be ascending");
  }
  HomogenizedDensity out;
  for (int k : k_list) {
    const CellGrid grid = grid_factory(k);
    if (grid.period_multiple() != k) throw InvalidInput("grid factory returned the wrong k");
    std::vector<CorrectorField> warm;
    for (std::size_t i = 0; i < out.k_values.size(); ++i) {
      const int prev = out.k_values[i];
      const auto& prev_corrector = out.per_k[i].corrector;
      if (k % prev == 0 && prev_corrector.grid().nodes_per_period() == grid.nodes_per_period())
        warm.push_back(prev_corrector.tiled(k / prev));
    }
    CellSolution sol = solve_cell(spec, t, lambda, grid, options, warm);
    out.stationary = out.stationary && sol.stationary;
    if (out.per_k.empty() || sol.value < out.value) {
      out.value = sol.value;
      out.best_k = k;
    }
    out.k_values.push_back(k);
    out.per_k.push_back(std::move(sol));
  }
  return out;
}

}  // namespace parahom
