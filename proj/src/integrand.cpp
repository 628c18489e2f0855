#include "parahom/integrand.hpp"

#include <algorithm>
#include <numbers>
#include <random>
#include <sstream>

#include "parahom/errors.hpp"
#include "parahom/util.hpp"

namespace parahom {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Fractional part in [0, 1); exact in floating point.
inline double frac(double v) { return v - std::floor(v); }

inline double coordinate(std::span<const double> y, int axis) {
  return axis < static_cast<int>(y.size()) ? y[axis] : 0.0;
}

// |x|^p from the squared norm.
inline double power_from_squared(double sq, double p) {
  if (p == 2.0) return sq;
  return std::pow(sq, 0.5 * p);
}

// d/dx |x|^p = p |x|^{p-2} x, returned as the scalar factor p |x|^{p-2}.
inline double power_gradient_factor(double sq, double p) {
  if (p == 2.0) return 2.0;
  if (sq == 0.0) return 0.0;
  return p * std::pow(sq, 0.5 * p - 1.0);
}

void require(bool ok, const std::string& message) {
  if (!ok) throw InvalidInput(message);
}

}  // namespace

double coefficient_value(const CoefficientField& field, std::span<const double> y) {
  return std::visit(
      overloaded{
          [](const ConstantField& f) { return f.value; },
          [&](const SinusoidalField& f) {
            return f.mean + f.amplitude * std::sin(kTwoPi * frac(coordinate(y, f.axis)));
          },
          [&](const LaminateField& f) {
            return frac(coordinate(y, f.axis)) < f.fraction ? f.alpha : f.beta;
          },
          [&](const CheckerboardField& f) {
            long parity = 0;
            for (double v : y) parity += static_cast<long>(std::floor(2.0 * frac(v)));
            return parity % 2 == 0 ? f.alpha : f.beta;
          },
      },
      field);
}

double coefficient_min(const CoefficientField& field) {
  return std::visit(overloaded{
                        [](const ConstantField& f) { return f.value; },
                        [](const SinusoidalField& f) { return f.mean - std::abs(f.amplitude); },
                        [](const LaminateField& f) { return std::min(f.alpha, f.beta); },
                        [](const CheckerboardField& f) { return std::min(f.alpha, f.beta); },
                    },
                    field);
}

double coefficient_max(const CoefficientField& field) {
  return std::visit(overloaded{
                        [](const ConstantField& f) { return f.value; },
                        [](const SinusoidalField& f) { return f.mean + std::abs(f.amplitude); },
                        [](const LaminateField& f) { return std::max(f.alpha, f.beta); },
                        [](const CheckerboardField& f) { return std::max(f.alpha, f.beta); },
                    },
                    field);
}

bool is_piecewise_constant(const CoefficientField& field) {
  return !std::holds_alternative<SinusoidalField>(field);
}

std::vector<double> coefficient_breakpoints(const CoefficientField& field, int axis) {
  return std::visit(overloaded{
                        [](const ConstantField&) { return std::vector<double>{}; },
                        [](const SinusoidalField&) { return std::vector<double>{}; },
                        [&](const LaminateField& f) {
                          return f.axis == axis ? std::vector<double>{0.0, f.fraction}
                                                : std::vector<double>{};
                        },
                        [](const CheckerboardField&) { return std::vector<double>{0.0, 0.5}; },
                    },
                    field);
}

double TimeWeight::operator()(double t) const {
  if (amplitude == 0.0) return base;
  return base + amplitude * std::sin(kTwoPi * frequency * t);
}

std::string to_string(Family family) {
  switch (family) {
    case Family::separable: return "separable";
    case Family::two_phase: return "two-phase";
    case Family::double_well: return "double-well";
    case Family::sum: return "sum";
  }
  return "unknown";
}

void IntegrandSpec::validate() const {
  require(std::isfinite(p) && p > 1.0, "p must exceed 1");
  require(std::isfinite(C1) && C1 > 0.0, "C1 must be positive");
  require(std::isfinite(C2) && C2 > C1, "C2 must exceed C1");
  require(m >= 1 && n >= 1, "dimensions m and n must be positive");
  require(!terms.empty(), "integrand needs at least one term");
  require(cells_per_period >= 1, "cells_per_period must be positive");

  auto check_field = [&](const CoefficientField& field) {
    require(std::isfinite(coefficient_min(field)) && std::isfinite(coefficient_max(field)),
            "coefficient parameters must be finite");
    require(coefficient_min(field) > 0.0, "coefficient field must be positive");
    std::visit(overloaded{
                   [](const ConstantField&) {},
                   [&](const SinusoidalField& f) {
                     require(f.axis >= 0 && f.axis < n, "coefficient axis out of range");
                   },
                   [&](const LaminateField& f) {
                     require(f.axis >= 0 && f.axis < n, "coefficient axis out of range");
                     require(f.fraction > 0.0 && f.fraction < 1.0,
                             "laminate fraction must lie in (0, 1)");
                   },
                   [](const CheckerboardField&) {},
               },
               field);
  };

  for (const auto& term : terms) {
    std::visit(overloaded{
                   [&](const SeparableTerm& s) {
                     check_field(s.coefficient);
                     require(std::isfinite(s.weight.base) && std::isfinite(s.weight.amplitude) &&
                                 std::isfinite(s.weight.frequency),
                             "time weight parameters must be finite");
                     require(s.weight.min() > 0.0, "time weight must stay positive");
                   },
                   [&](const DoubleWellTerm& d) {
                     check_field(d.coefficient);
                     require(d.well.rows() == m && d.well.cols() == n,
                             "double-well offset must be an m x n matrix");
                     require(d.well.allFinite(), "double-well offset must be finite");
                     require(d.c0 >= C1, "double-well c0 must be at least C1");
                   },
               },
               term);
  }
}

Family IntegrandSpec::family() const {
  if (terms.size() != 1) return Family::sum;
  if (const auto* s = std::get_if<SeparableTerm>(&terms.front())) {
    return std::holds_alternative<LaminateField>(s->coefficient) ||
                   std::holds_alternative<CheckerboardField>(s->coefficient)
               ? Family::two_phase
               : Family::separable;
  }
  return Family::double_well;
}

bool IntegrandSpec::is_convex() const {
  for (const auto& term : terms) {
    if (const auto* d = std::get_if<DoubleWellTerm>(&term)) {
      if (d->well.norm() > 0.0) return false;
    }
  }
  return true;
}

double IntegrandSpec::well_scale() const {
  double scale = 0.0;
  for (const auto& term : terms) {
    if (const auto* d = std::get_if<DoubleWellTerm>(&term)) scale = std::max(scale, d->well.norm());
  }
  return scale;
}

std::string IntegrandSpec::canonical() const {
  std::ostringstream os;
  os << "m=" << m << ";n=" << n << ";p=" << format_double(p) << ";C1=" << format_double(C1)
     << ";C2=" << format_double(C2) << ";cpp=" << cells_per_period;
  auto field_text = [](const CoefficientField& field) {
    return std::visit(
        overloaded{
            [](const ConstantField& f) { return "const(" + format_double(f.value) + ")"; },
            [](const SinusoidalField& f) {
              return "sin(" + format_double(f.mean) + "," + format_double(f.amplitude) + "," +
                     std::to_string(f.axis) + ")";
            },
            [](const LaminateField& f) {
              return "lam(" + format_double(f.alpha) + "," + format_double(f.beta) + "," +
                     format_double(f.fraction) + "," + std::to_string(f.axis) + ")";
            },
            [](const CheckerboardField& f) {
              return "chk(" + format_double(f.alpha) + "," + format_double(f.beta) + ")";
            },
        },
        field);
  };
  for (const auto& term : terms) {
    std::visit(overloaded{
                   [&](const SeparableTerm& s) {
                     os << ";sep[" << field_text(s.coefficient) << ","
                        << format_double(s.weight.base) << "," << format_double(s.weight.amplitude)
                        << "," << format_double(s.weight.frequency) << "]";
                   },
                   [&](const DoubleWellTerm& d) {
                     os << ";dw[" << field_text(d.coefficient) << "," << format_double(d.c0);
                     for (Eigen::Index i = 0; i < d.well.size(); ++i)
                       os << "," << format_double(d.well(i));
                     os << "]";
                   },
               },
               term);
  }
  return os.str();
}

IntegrandSpec make_separable(CoefficientField coefficient, double p, double C1, double C2,
                             TimeWeight weight, int m, int n) {
  IntegrandSpec spec;
  spec.m = m;
  spec.n = n;
  spec.p = p;
  spec.C1 = C1;
  spec.C2 = C2;
  spec.terms.push_back(SeparableTerm{std::move(coefficient), weight});
  return spec;
}

IntegrandSpec make_double_well(CoefficientField coefficient, Matrix well, double c0, double p,
                               double C1, double C2) {
  IntegrandSpec spec;
  spec.m = static_cast<int>(well.rows());
  spec.n = static_cast<int>(well.cols());
  spec.p = p;
  spec.C1 = C1;
  spec.C2 = C2;
  spec.terms.push_back(DoubleWellTerm{std::move(coefficient), std::move(well), c0});
  return spec;
}

double evaluate_unchecked(const IntegrandSpec& spec, std::span<const double> y, double t,
                          const Matrix& lambda) {
  const double sq = lambda.squaredNorm();
  double value = 0.0;
  for (const auto& term : spec.terms) {
    if (const auto* s = std::get_if<SeparableTerm>(&term)) {
      value += coefficient_value(s->coefficient, y) * s->weight(t) * power_from_squared(sq, spec.p);
    } else {
      const auto& d = std::get<DoubleWellTerm>(term);
      const double minus = (lambda - d.well).squaredNorm();
      const double plus = (lambda + d.well).squaredNorm();
      value += coefficient_value(d.coefficient, y) * power_from_squared(std::min(minus, plus), spec.p) +
               d.c0 * power_from_squared(sq, spec.p);
    }
  }
  return value;
}

bool evaluate_with_gradient(const IntegrandSpec& spec, std::span<const double> y, double t,
                            const Matrix& lambda, double& value, Matrix& grad) {
  const double sq = lambda.squaredNorm();
  const double base_factor = power_gradient_factor(sq, spec.p);
  const double base_power = power_from_squared(sq, spec.p);
  bool kink = false;
  value = 0.0;
  grad.setZero();
  for (const auto& term : spec.terms) {
    if (const auto* s = std::get_if<SeparableTerm>(&term)) {
      const double w = coefficient_value(s->coefficient, y) * s->weight(t);
      value += w * base_power;
      grad += (w * base_factor) * lambda;
    } else {
      const auto& d = std::get<DoubleWellTerm>(term);
      const double a = coefficient_value(d.coefficient, y);
      const double minus = (lambda - d.well).squaredNorm();
      const double plus = (lambda + d.well).squaredNorm();
      // Ties go to the (lambda - W) branch.
      const bool use_minus = minus <= plus;
      if (minus == plus && d.well.squaredNorm() > 0.0) kink = true;
      const double sq_branch = use_minus ? minus : plus;
      value += a * power_from_squared(sq_branch, spec.p) + d.c0 * base_power;
      const double f_branch = a * power_gradient_factor(sq_branch, spec.p);
      if (use_minus)
        grad += f_branch * (lambda - d.well);
      else
        grad += f_branch * (lambda + d.well);
      grad += (d.c0 * base_factor) * lambda;
    }
  }
  return kink;
}

namespace {

void check_arguments(const IntegrandSpec& spec, std::span<const double> y, double t,
                     const Matrix& lambda) {
  if (static_cast<int>(y.size()) != spec.n)
    throw DimensionMismatch("point dimension does not match n");
  if (lambda.rows() != spec.m || lambda.cols() != spec.n)
    throw DimensionMismatch("lambda must be an m x n matrix");
  for (double v : y)
    if (!std::isfinite(v)) throw InvalidInput("non-finite spatial coordinate");
  if (!std::isfinite(t)) throw InvalidInput("non-finite time");
  if (!lambda.allFinite()) throw InvalidInput("non-finite lambda");
}

}  // namespace

double evaluate(const IntegrandSpec& spec, std::span<const double> y, double t,
                const Matrix& lambda) {
  check_arguments(spec, y, t, lambda);
  return evaluate_unchecked(spec, y, t, lambda);
}

LambdaGradient gradient_lambda(const IntegrandSpec& spec, std::span<const double> y, double t,
                               const Matrix& lambda) {
  check_arguments(spec, y, t, lambda);
  LambdaGradient out;
  out.value = Matrix::Zero(spec.m, spec.n);
  double value = 0.0;
  out.on_kink = evaluate_with_gradient(spec, y, t, lambda, value, out.value);
  return out;
}

GrowthReport check_growth(const IntegrandSpec& spec, std::size_t sample_count,
                          std::uint64_t seed, double horizon) {
  spec.validate();
  if (sample_count < 1) throw InvalidInput("sample_count must be at least 1");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  GrowthReport report;
  report.samples = sample_count;
  std::vector<double> y(spec.n);
  Matrix lambda(spec.m, spec.n);
  for (std::size_t s = 0; s < sample_count; ++s) {
    for (auto& v : y) v = -2.0 + 4.0 * unit(rng);
    const double t = horizon * unit(rng);
    const double scale = std::pow(10.0, -2.0 + 4.0 * unit(rng));
    for (Eigen::Index i = 0; i < lambda.size(); ++i) lambda(i) = scale * normal(rng);
    if (s == 0) lambda.setZero();

    const double value = evaluate(spec, y, t, lambda);
    const double norm_p = power_from_squared(lambda.squaredNorm(), spec.p);
    const double lower = spec.C1 * norm_p;
    const double upper = spec.C2 * (1.0 + norm_p);
    // Relative slack of a few ulps keeps exact-equality cases from flagging.
    const double slack = 1e-12 * std::max(1.0, std::abs(value));
    if (value < lower - slack || value > upper + slack || !std::isfinite(value)) {
      GrowthViolation v;
      v.y = y;
      v.t = t;
      v.lambda = lambda;
      v.value = value;
      v.lower = lower;
      v.upper = upper;
      v.lower_failed = value < lower - slack;
      v.margin = v.lower_failed ? lower - value : value - upper;
      report.violations.push_back(std::move(v));
    }
  }
  return report;
}

}  // namespace parahom
