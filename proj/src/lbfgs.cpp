#include "parahom/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

namespace parahom {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double sup_norm(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

struct Pair {
  std::vector<double> s, y;
  double rho;
};

}  // namespace

MinimizerResult minimize_lbfgs(const Objective& objective, std::vector<double> x0,
                               const MinimizerOptions& options,
                               const Preconditioner& preconditioner) {
  const std::size_t dim = x0.size();
  MinimizerResult result;
  std::vector<double> x = std::move(x0);
  std::vector<double> g(dim), gn(dim), xn(dim), d(dim), r(dim), q(dim);
  double f = objective(x, g);

  result.x = x;
  result.value = f;
  result.residual = sup_norm(g);
  result.value_gap = std::numeric_limits<double>::infinity();
  if (dim == 0) {
    result.stationary = true;
    return result;
  }

  auto apply_precond = [&](std::span<const double> in, std::span<double> out) {
    if (preconditioner)
      preconditioner(in, out);
    else
      std::copy(in.begin(), in.end(), out.begin());
  };

  std::deque<Pair> pairs;
  std::vector<double> values{f};
  std::vector<double> alpha(options.history);
  const double noise = 16.0 * std::numeric_limits<double>::epsilon();

  int it = 0;
  for (; it < options.max_iterations; ++it) {
    const double residual = sup_norm(g);
    if (residual <= options.gradient_tolerance) break;
    if (options.value_gap > 0.0 && it >= options.gap_window &&
        values[it - options.gap_window] - f < options.value_gap)
      break;

    // Two-loop recursion.
    q = g;
    for (int i = static_cast<int>(pairs.size()) - 1; i >= 0; --i) {
      alpha[i] = pairs[i].rho * dot(pairs[i].s, q);
      for (std::size_t k = 0; k < dim; ++k) q[k] -= alpha[i] * pairs[i].y[k];
    }
    apply_precond(q, r);
    if (!pairs.empty()) {
      const auto& last = pairs.back();
      apply_precond(last.y, d);
      const double yPy = dot(last.y, d);
      const double gamma = yPy > 0.0 ? 1.0 / (last.rho * yPy) : 1.0;
      for (double& v : r) v *= gamma;
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const double beta = pairs[i].rho * dot(pairs[i].y, r);
      for (std::size_t k = 0; k < dim; ++k) r[k] += pairs[i].s[k] * (alpha[i] - beta);
    }
    for (std::size_t k = 0; k < dim; ++k) d[k] = -r[k];
    double gd = dot(g, d);
    if (!(gd < 0.0)) {
      pairs.clear();
      apply_precond(g, r);
      for (std::size_t k = 0; k < dim; ++k) d[k] = -r[k];
      gd = dot(g, d);
      if (!(gd < 0.0)) {
        for (std::size_t k = 0; k < dim; ++k) d[k] = -g[k];
        gd = dot(g, d);
      }
    }

    double step = 1.0;
    double fn = 0.0;
    bool accepted = false;
    for (int b = 0; b <= options.max_backtracks; ++b) {
      for (std::size_t k = 0; k < dim; ++k) xn[k] = x[k] + step * d[k];
      fn = objective(xn, gn);
      if (std::isfinite(fn)) {
        if (fn <= f + options.armijo * step * gd) {
          accepted = true;
          break;
        }
        // Near convergence the decrease drops below round-off; accept steps
        // that keep the value flat while reducing the directional slope.
        if (fn <= f + noise * std::abs(f) && std::abs(dot(gn, d)) <= 0.9 * std::abs(gd)) {
          accepted = true;
          break;
        }
      }
      step *= options.backtrack;
    }
    if (!accepted) {
      result.line_search_failed = true;
      break;
    }

    Pair pair{std::vector<double>(dim), std::vector<double>(dim), 0.0};
    for (std::size_t k = 0; k < dim; ++k) {
      pair.s[k] = xn[k] - x[k];
      pair.y[k] = gn[k] - g[k];
    }
    const double sy = dot(pair.s, pair.y);
    if (sy > 1e-14 * std::sqrt(dot(pair.s, pair.s) * dot(pair.y, pair.y))) {
      pair.rho = 1.0 / sy;
      pairs.push_back(std::move(pair));
      if (static_cast<int>(pairs.size()) > options.history) pairs.pop_front();
    }
    x.swap(xn);
    g.swap(gn);
    f = fn;
    values.push_back(f);

    if (f < result.value || (f == result.value && sup_norm(g) < result.residual)) {
      result.x = x;
      result.value = f;
      result.residual = sup_norm(g);
    }
  }

  // A stationary final iterate within round-off of the best value wins.
  const double final_residual = sup_norm(g);
  if (final_residual <= options.gradient_tolerance && result.residual > final_residual &&
      f <= result.value + noise * std::abs(result.value)) {
    result.x = x;
    result.value = f;
    result.residual = final_residual;
  }

  result.iterations = it;
  result.stationary = result.residual <= options.gradient_tolerance;
  const int window = options.gap_window;
  if (static_cast<int>(values.size()) > window)
    result.value_gap = values[values.size() - 1 - window] - values.back();
  return result;
}

}  // namespace parahom
