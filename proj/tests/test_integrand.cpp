#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "parahom/errors.hpp"
#include "parahom/integrand.hpp"

using namespace parahom;

namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

IntegrandSpec sine_spec() { return make_separable(SinusoidalField{}, 2.0, 1.0, 3.0); }

IntegrandSpec checkerboard_spec() {
  return make_separable(CheckerboardField{1.0, 4.0}, 2.0, 1.0, 5.0, {}, 1, 2);
}

IntegrandSpec double_well_spec() {
  Matrix W(2, 2);
  W << 1.0, 0.0, 0.0, -1.0;
  auto spec = make_double_well(SinusoidalField{2.0, 1.0, 0}, W, 1.0, 2.0, 1.0, 8.0);
  return spec;
}

IntegrandSpec sum_spec() {
  IntegrandSpec spec = make_separable(LaminateField{1.0, 4.0, 0.5, 1}, 3.0, 1.0, 12.0,
                                      TimeWeight{1.5, 0.5, 1.0}, 1, 2);
  Matrix W(1, 2);
  W << 1.0, 1.0;
  spec.terms.push_back(DoubleWellTerm{ConstantField{1.0}, W, 1.0});
  return spec;
}

std::vector<IntegrandSpec> all_families() {
  return {sine_spec(), checkerboard_spec(), double_well_spec(), sum_spec()};
}

Matrix random_matrix(std::mt19937_64& rng, int m, int n, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Matrix M(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = u(rng);
  return M;
}

}  // namespace

TEST(Integrand, FamiliesAreClassified) {
  EXPECT_EQ(sine_spec().family(), Family::separable);
  EXPECT_EQ(checkerboard_spec().family(), Family::two_phase);
  EXPECT_EQ(double_well_spec().family(), Family::double_well);
  EXPECT_EQ(sum_spec().family(), Family::sum);
  EXPECT_TRUE(sine_spec().is_convex());
  EXPECT_FALSE(double_well_spec().is_convex());
}

TEST(Integrand, ValidationNamesTheInvariant) {
  auto spec = sine_spec();
  spec.p = 0.5;
  try {
    spec.validate();
    FAIL() << "expected InvalidInput";
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("p must exceed 1"), std::string::npos);
  }
  auto bad = sine_spec();
  bad.terms.clear();
  EXPECT_THROW(bad.validate(), InvalidInput);
}

TEST(Integrand, RejectsNonFiniteArguments) {
  const auto spec = sine_spec();
  const double y[] = {0.25};
  const double nan_y[] = {std::nan("")};
  EXPECT_THROW(evaluate(spec, nan_y, 0.0, scalar(1.0)), InvalidInput);
  EXPECT_THROW(evaluate(spec, y, INFINITY, scalar(1.0)), InvalidInput);
  EXPECT_THROW(evaluate(spec, y, 0.0, scalar(NAN)), InvalidInput);
}

TEST(Integrand, PeriodicInY) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> shift(-3, 3);
  for (const auto& spec : all_families()) {
    for (int s = 0; s < 200; ++s) {
      std::vector<double> y(spec.n), z(spec.n);
      for (int i = 0; i < spec.n; ++i) y[i] = u(rng), z[i] = y[i] + shift(rng);
      const Matrix l = random_matrix(rng, spec.m, spec.n, 2.0);
      const double fy = evaluate(spec, y, 0.3, l), fz = evaluate(spec, z, 0.3, l);
      // Shifting by an integer can move a sample across a phase boundary by
      // one ulp, so only points away from the jumps are compared.
      bool near_jump = false;
      for (int i = 0; i < spec.n; ++i) {
        const double d = std::min({std::abs(y[i] - 0.5), y[i], 1.0 - y[i]});
        near_jump = near_jump || d < 1e-9;
      }
      if (!near_jump) EXPECT_NEAR(fy, fz, 1e-12 * std::max(1.0, std::abs(fy)));
    }
  }
}

TEST(Integrand, DyadicShiftsAreBitIdentical) {
  for (const auto& spec : all_families()) {
    std::vector<double> y(spec.n, 0.375), z(spec.n, 2.375);
    const Matrix l = Matrix::Constant(spec.m, spec.n, 0.7);
    EXPECT_EQ(evaluate(spec, y, 0.25, l), evaluate(spec, z, 0.25, l));
  }
}

TEST(Integrand, ConstantCoefficientIsHomogeneous) {
  const auto spec = make_separable(ConstantField{3.0}, 3.0, 1.0, 4.0);
  const double y[] = {0.1};
  for (double l : {-2.0, -0.5, 0.0, 0.5, 1.5})
    EXPECT_NEAR(evaluate(spec, y, 0.0, scalar(l)), 3.0 * std::pow(std::abs(l), 3.0), 1e-12);
}

TEST(Integrand, SeparableIsPositivelyHomogeneous) {
  std::mt19937_64 rng(5);
  const auto spec = sum_spec();
  auto sep = spec;
  sep.terms.resize(1);
  for (int s = 0; s < 50; ++s) {
    const double y[] = {0.3, 0.8};
    const Matrix l = random_matrix(rng, 1, 2, 2.0);
    const double base = evaluate(sep, y, 0.4, l);
    EXPECT_NEAR(evaluate(sep, y, 0.4, 2.0 * l), 8.0 * base, 1e-10 * std::max(1.0, base));
  }
}

TEST(Integrand, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& spec : all_families()) {
    for (int s = 0; s < 20; ++s) {
      std::vector<double> y(spec.n);
      for (auto& v : y) v = u(rng);
      const Matrix l = random_matrix(rng, spec.m, spec.n, 2.0);
      const auto g = gradient_lambda(spec, y, 0.2, l);
      const double h = 1e-6;
      Matrix fd(spec.m, spec.n);
      for (int i = 0; i < spec.m; ++i)
        for (int j = 0; j < spec.n; ++j) {
          Matrix a = l, b = l;
          a(i, j) += h, b(i, j) -= h;
          fd(i, j) = (evaluate(spec, y, 0.2, a) - evaluate(spec, y, 0.2, b)) / (2 * h);
        }
      EXPECT_LE((fd - g.value).norm(), 1e-6 * std::max(1.0, g.value.norm()))
          << to_string(spec.family());
    }
  }
}

TEST(Integrand, GradientVanishesAtZeroForConvexFamilies) {
  const double y[] = {0.2};
  const auto g = gradient_lambda(sine_spec(), y, 0.0, scalar(0.0));
  EXPECT_EQ(g.value.norm(), 0.0);
}

TEST(Integrand, DoubleWellKinkIsFlagged) {
  // |l - W| = |l + W| exactly at l = 0 in one dimension.
  const auto spec = make_double_well(ConstantField{1.0}, scalar(1.0), 1.0, 2.0, 1.0, 4.0);
  const double y[] = {0.0};
  EXPECT_TRUE(gradient_lambda(spec, y, 0.0, scalar(0.0)).on_kink);
  EXPECT_FALSE(gradient_lambda(spec, y, 0.0, scalar(0.3)).on_kink);
  EXPECT_DOUBLE_EQ(evaluate(spec, y, 0.0, scalar(0.0)), 1.0);
}

TEST(Growth, SineFamilyWithinEnvelope) {
  EXPECT_TRUE(check_growth(sine_spec(), 10000, 1).passed());
}

TEST(Growth, TooLargeLowerConstantIsDetected) {
  auto spec = sine_spec();
  spec.C1 = 2.5;
  const auto report = check_growth(spec, 10000, 1);
  ASSERT_FALSE(report.passed());
  EXPECT_TRUE(report.violations.front().lower_failed);
}

TEST(Growth, DoubleWellWithC0EqualToC1) {
  const auto spec = make_double_well(SinusoidalField{}, scalar(1.0), 1.0, 2.0, 1.0, 7.0);
  EXPECT_TRUE(check_growth(spec, 10000, 2).passed());
}

TEST(Growth, EveryBuiltInFamilyPasses) {
  for (const auto& spec : all_families())
    EXPECT_TRUE(check_growth(spec, 10000, 9).passed()) << to_string(spec.family());
}

TEST(Growth, SameSeedSameSamples) {
  auto spec = sine_spec();
  spec.C1 = 2.5;
  const auto a = check_growth(spec, 500, 4), b = check_growth(spec, 500, 4);
  ASSERT_EQ(a.violations.size(), b.violations.size());
  for (std::size_t i = 0; i < a.violations.size(); ++i)
    EXPECT_EQ(a.violations[i].value, b.violations[i].value);
}

TEST(Integrand, CanonicalTextDistinguishesParameters) {
  auto a = sine_spec(), b = sine_spec();
  b.C2 = 3.5;
  EXPECT_NE(a.canonical(), b.canonical());
  EXPECT_EQ(a.canonical(), sine_spec().canonical());
}
