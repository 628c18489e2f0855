#pragma once

#include <memory>
#include <span>
#include <vector>

#include "parahom/integrand.hpp"
#include "parahom/lbfgs.hpp"
#include "parahom/mesh.hpp"

namespace parahom {

/// Discrete energy  sum_c w f(y_c, t, G + D v|_c)  over a set of mesh cells,
/// as a function of the values v at the free nodes. Shared by the cell
/// problem (G = lambda, y_c = cell midpoint) and the Dirichlet problem on
/// Omega (G = 0, y_c = midpoint / eps).
struct NodalProblem {
  const IntegrandSpec* spec = nullptr;
  const BoxMesh* mesh = nullptr;
  int m = 1;
  double t = 0.0;
  Matrix offset;
  std::vector<Index> cells;
  /// Integrand position y for every entry of `cells` (n values each).
  std::vector<double> cell_points;
  double cell_weight = 1.0;
  /// Unknown nodes, ascending.
  std::vector<Index> free_nodes;
  /// Full nodal vector (node * m + i); entries of free nodes are ignored.
  std::vector<double> fixed_values;
};

class NodalEnergy {
 public:
  explicit NodalEnergy(NodalProblem problem);

  std::size_t size() const { return problem_.free_nodes.size() * problem_.m; }
  const NodalProblem& problem() const { return problem_; }

  double value(std::span<const double> x) const;
  double value_and_gradient(std::span<const double> x, std::span<double> grad) const;

  /// Full nodal vector with x scattered into the free slots.
  std::vector<double> expand(std::span<const double> x) const;
  /// Free-slot values of a full nodal vector.
  std::vector<double> restrict_to_free(std::span<const double> full) const;

  /// Inverse of the finite-difference Laplacian on the free nodes, applied
  /// componentwise. Factorized once and shared between copies.
  Preconditioner laplace_preconditioner() const;

 private:
  NodalProblem problem_;
  std::vector<Index> slot_;
  struct Laplace;
  std::shared_ptr<Laplace> laplace_;
};

}  // namespace parahom
