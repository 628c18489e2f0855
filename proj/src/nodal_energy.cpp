#include "parahom/nodal_energy.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "parahom/errors.hpp"

namespace parahom {

struct NodalEnergy::Laplace {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
};

NodalEnergy::NodalEnergy(NodalProblem problem) : problem_(std::move(problem)) {
  const auto& p = problem_;
  if (p.spec == nullptr || p.mesh == nullptr) throw InvalidInput("nodal problem is incomplete");
  const int n = p.mesh->dim();
  if (p.offset.rows() != p.m || p.offset.cols() != n)
    throw DimensionMismatch("gradient offset must be m x n");
  if (p.spec->m != p.m || p.spec->n != n)
    throw DimensionMismatch("integrand dimensions do not match the grid");
  if (p.cell_points.size() != p.cells.size() * n)
    throw DimensionMismatch("one integrand point per cell is required");
  if (static_cast<Index>(p.fixed_values.size()) != p.mesh->node_count() * p.m)
    throw DimensionMismatch("fixed values must cover every node");
  slot_.assign(p.mesh->node_count(), -1);
  for (std::size_t s = 0; s < p.free_nodes.size(); ++s) slot_[p.free_nodes[s]] = static_cast<Index>(s);

  laplace_ = std::make_shared<Laplace>();
  const Index count = static_cast<Index>(p.free_nodes.size());
  if (count == 0) return;
  std::vector<Eigen::Triplet<double>> entries;
  std::vector<int> multi(n);
  for (Index s = 0; s < count; ++s) {
    const Index node = p.free_nodes[s];
    p.mesh->node_multi_index(node, multi);
    double diag = 0.0;
    for (int a = 0; a < n; ++a) {
      const double w = 1.0 / (p.mesh->spacing(a) * p.mesh->spacing(a));
      diag += 2.0 * w;
      for (int dir : {-1, 1}) {
        const int i = multi[a] + dir;
        if (i < 0 || i > p.mesh->cells_along(a)) continue;
        multi[a] = i;
        const Index nb = slot_[p.mesh->node_index(multi)];
        multi[a] -= dir;
        if (nb >= 0) entries.emplace_back(s, nb, -w);
      }
    }
    entries.emplace_back(s, s, diag);
  }
  Eigen::SparseMatrix<double> A(count, count);
  A.setFromTriplets(entries.begin(), entries.end());
  laplace_->solver.compute(A);
  if (laplace_->solver.info() != Eigen::Success)
    throw Error("Laplacian preconditioner factorization failed");
}

std::vector<double> NodalEnergy::expand(std::span<const double> x) const {
  std::vector<double> full = problem_.fixed_values;
  const int m = problem_.m;
  for (std::size_t s = 0; s < problem_.free_nodes.size(); ++s)
    for (int i = 0; i < m; ++i) full[problem_.free_nodes[s] * m + i] = x[s * m + i];
  return full;
}

std::vector<double> NodalEnergy::restrict_to_free(std::span<const double> full) const {
  const int m = problem_.m;
  std::vector<double> x(size());
  for (std::size_t s = 0; s < problem_.free_nodes.size(); ++s)
    for (int i = 0; i < m; ++i) x[s * m + i] = full[problem_.free_nodes[s] * m + i];
  return x;
}

double NodalEnergy::value(std::span<const double> x) const {
  const auto& p = problem_;
  const auto full = expand(x);
  const int n = p.mesh->dim();
  Matrix G(p.m, n);
  double total = 0.0;
  for (std::size_t c = 0; c < p.cells.size(); ++c) {
    p.mesh->cell_gradient(full, p.m, p.cells[c], G);
    G += p.offset;
    total += evaluate_unchecked(*p.spec, std::span<const double>(p.cell_points).subspan(c * n, n),
                                p.t, G);
  }
  return total * p.cell_weight;
}

double NodalEnergy::value_and_gradient(std::span<const double> x, std::span<double> grad) const {
  const auto& p = problem_;
  const auto full = expand(x);
  const int n = p.mesh->dim();
  const int m = p.m;
  const int corners_per_cell = p.mesh->corners_per_cell();
  std::fill(grad.begin(), grad.end(), 0.0);
  Matrix G(m, n), dG(m, n);
  Index corners[8];
  double total = 0.0;
  for (std::size_t c = 0; c < p.cells.size(); ++c) {
    p.mesh->cell_gradient(full, m, p.cells[c], G);
    G += p.offset;
    double f = 0.0;
    evaluate_with_gradient(*p.spec, std::span<const double>(p.cell_points).subspan(c * n, n), p.t,
                           G, f, dG);
    total += f;
    p.mesh->cell_corners(p.cells[c], std::span<Index>(corners, corners_per_cell));
    for (int k = 0; k < corners_per_cell; ++k) {
      const Index s = slot_[corners[k]];
      if (s < 0) continue;
      for (int a = 0; a < n; ++a) {
        const double w = p.cell_weight * p.mesh->gradient_weight(k, a);
        for (int i = 0; i < m; ++i) grad[s * m + i] += w * dG(i, a);
      }
    }
  }
  return total * p.cell_weight;
}

Preconditioner NodalEnergy::laplace_preconditioner() const {
  auto laplace = laplace_;
  const int m = problem_.m;
  const Index count = static_cast<Index>(problem_.free_nodes.size());
  return [laplace, m, count](std::span<const double> r, std::span<double> out) {
    Eigen::VectorXd rhs(count);
    for (int i = 0; i < m; ++i) {
      for (Index s = 0; s < count; ++s) rhs[s] = r[s * m + i];
      const Eigen::VectorXd z = laplace->solver.solve(rhs);
      for (Index s = 0; s < count; ++s) out[s * m + i] = z[s];
    }
  };
}

}  // namespace parahom
