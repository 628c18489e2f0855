#pragma once

#include <functional>
#include <span>
#include <vector>

namespace parahom {

struct MinimizerOptions {
  int max_iterations = 5000;
  /// Stop once the sup-norm of the gradient falls below this value.
  double gradient_tolerance = 1e-8;
  int history = 10;
  double armijo = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 60;
  /// When positive, also stop once the value decrease over the last
  /// `gap_window` iterations is below this amount.
  double value_gap = 0.0;
  int gap_window = 10;
};

struct MinimizerResult {
  std::vector<double> x;
  double value = 0.0;
  /// Gradient sup-norm at x.
  double residual = 0.0;
  int iterations = 0;
  bool stationary = false;
  /// Value decrease over the final `gap_window` iterations (infinite when
  /// fewer iterations ran).
  double value_gap = 0.0;
  bool line_search_failed = false;
};

/// Writes the gradient into `grad` and returns the value.
using Objective = std::function<double(std::span<const double> x, std::span<double> grad)>;
/// Applies an approximate inverse Hessian: out = P r.
using Preconditioner = std::function<void(std::span<const double> r, std::span<double> out)>;

/// Limited-memory BFGS with backtracking Armijo line search. The initial
/// inverse-Hessian approximation is the preconditioner scaled by the usual
/// s'y / y'Py factor. Returns the best iterate visited, so the result never
/// exceeds the starting value.
MinimizerResult minimize_lbfgs(const Objective& objective, std::vector<double> x0,
                               const MinimizerOptions& options,
                               const Preconditioner& preconditioner = {});

}  // namespace parahom
