#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace parahom {

/// m x n gradient matrices (rows: components of u, columns: space axes).
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// 1-periodic coefficient fields a(y)
// ---------------------------------------------------------------------------

struct ConstantField {
  double value = 1.0;
};

/// a(y) = mean + amplitude * sin(2 pi y[axis])
struct SinusoidalField {
  double mean = 2.0;
  double amplitude = 1.0;
  int axis = 0;
};

/// Two-phase laminate stacked along `axis`: alpha on [0, fraction), beta on
/// [fraction, 1), repeated with period 1.
struct LaminateField {
  double alpha = 1.0;
  double beta = 4.0;
  double fraction = 0.5;
  int axis = 0;
};

/// Checkerboard of half-period squares: alpha where sum_i floor(2 y_i) is
/// even, beta otherwise.
struct CheckerboardField {
  double alpha = 1.0;
  double beta = 4.0;
};

using CoefficientField =
    std::variant<ConstantField, SinusoidalField, LaminateField, CheckerboardField>;

double coefficient_value(const CoefficientField& field, std::span<const double> y);
double coefficient_min(const CoefficientField& field);
double coefficient_max(const CoefficientField& field);
bool is_piecewise_constant(const CoefficientField& field);

/// Points in [0,1) where the field restricted to `axis` jumps.
std::vector<double> coefficient_breakpoints(const CoefficientField& field, int axis);

/// Positive time weight g(t) = base + amplitude * sin(2 pi frequency t).
struct TimeWeight {
  double base = 1.0;
  double amplitude = 0.0;
  double frequency = 1.0;

  double operator()(double t) const;
  double min() const { return base - std::abs(amplitude); }
  double max() const { return base + std::abs(amplitude); }
};

// ---------------------------------------------------------------------------
// Density families
// ---------------------------------------------------------------------------

/// a(y) g(t) |lambda|^p
struct SeparableTerm {
  CoefficientField coefficient;
  TimeWeight weight;
};

/// a(y) min(|lambda - W|^p, |lambda + W|^p) + c0 |lambda|^p
struct DoubleWellTerm {
  CoefficientField coefficient;
  Matrix well;
  double c0 = 1.0;
};

using IntegrandTerm = std::variant<SeparableTerm, DoubleWellTerm>;

enum class Family { separable, two_phase, double_well, sum };

std::string to_string(Family family);

/// Periodic density f(y, t, lambda): a sum of built-in terms sharing the
/// growth exponent p, with declared growth constants C1 |l|^p <= f <= C2 (1 + |l|^p).
struct IntegrandSpec {
  int m = 1;
  int n = 1;
  double p = 2.0;
  double C1 = 1.0;
  double C2 = 2.0;
  std::vector<IntegrandTerm> terms;
  /// Spatial cells per oscillation period required when sampling f(x/eps, ...).
  int cells_per_period = 8;

  /// Throws InvalidInput naming the first violated invariant.
  void validate() const;

  Family family() const;
  bool is_convex() const;

  /// Largest |W| over the double-well terms (0 if none).
  double well_scale() const;

  /// Deterministic text form of every parameter, used for hashing.
  std::string canonical() const;
};

/// Convenience constructors.
IntegrandSpec make_separable(CoefficientField coefficient, double p, double C1, double C2,
                             TimeWeight weight = {}, int m = 1, int n = 1);
IntegrandSpec make_double_well(CoefficientField coefficient, Matrix well, double c0,
                               double p, double C1, double C2);

/// f(y, t, lambda). Throws InvalidInput on non-finite arguments.
double evaluate(const IntegrandSpec& spec, std::span<const double> y, double t,
                const Matrix& lambda);

struct LambdaGradient {
  Matrix value;
  /// Set when a double-well term was evaluated exactly on |l - W| = |l + W|;
  /// the (l - W) branch is used there.
  bool on_kink = false;
};

LambdaGradient gradient_lambda(const IntegrandSpec& spec, std::span<const double> y,
                               double t, const Matrix& lambda);

/// Value and gradient in one pass, without argument checks. `grad` must be m x n.
/// Returns true when a kink branch choice was made.
bool evaluate_with_gradient(const IntegrandSpec& spec, std::span<const double> y, double t,
                            const Matrix& lambda, double& value, Matrix& grad);
double evaluate_unchecked(const IntegrandSpec& spec, std::span<const double> y, double t,
                          const Matrix& lambda);

// ---------------------------------------------------------------------------
// Growth check
// ---------------------------------------------------------------------------

struct GrowthViolation {
  std::vector<double> y;
  double t = 0.0;
  Matrix lambda;
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  /// Signed amount by which the violated bound is missed (positive).
  double margin = 0.0;
  bool lower_failed = false;
};

struct GrowthReport {
  std::size_t samples = 0;
  std::vector<GrowthViolation> violations;
  bool passed() const { return violations.empty(); }
};

/// Samples (y, t, lambda) with a seeded generator: y in [-2, 2)^n, t in
/// [0, horizon], lambda entries scaled over several decades.
GrowthReport check_growth(const IntegrandSpec& spec, std::size_t sample_count,
                          std::uint64_t seed, double horizon = 1.0);

}  // namespace parahom
