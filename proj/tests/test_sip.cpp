#include <gtest/gtest.h>

#include "framelab/framelab.hpp"

using namespace framelab;

namespace {

Measure unit_plus_point() { return Measure::sum({Measure::lebesgue({{0.0, 1.0}}), Measure::dirac({2.0})}); }

Measure two_interval() {
  return Measure::piecewise_constant({{0.0, 3.0}}, {{{{0.0, 1.0}}, 0.5}, {{{2.0, 3.0}}, 0.5}});
}

}  // namespace

TEST(NormP, ConstantOnProbability) {
  for (double p : {1.0, 1.5, 2.0, 4.0}) {
    EXPECT_NEAR(norm_p(constant_function(1), two_interval(), ExponentPair(p)), 1.0, 1e-14);
    EXPECT_NEAR(norm_p(constant_function(1), Measure::self_similar({{4}}, {{0}, {2}}, {0.5, 0.5}), ExponentPair(p)), 1.0,
                1e-15);
  }
}

TEST(NormP, PointIndicatorUnderMixedMeasure) {
  const TestFunction chi = point_indicator(Point{2.0});
  for (double p : {1.0, 1.5, 2.0, 3.0}) EXPECT_DOUBLE_EQ(norm_p(chi, unit_plus_point(), ExponentPair(p)), 1.0);
}

TEST(NormP, IndicatorOnTwoIntervals) {
  EXPECT_NEAR(norm_p(indicator({{0.0, 1.0}}), two_interval(), ExponentPair(2.0)), std::sqrt(0.5), 1e-15);
}

TEST(NormP, TrigAgainstParseval) {
  std::mt19937_64 rng(5);
  const TestFunction f = random_full_trig(rng, 1, 20);
  double s = 0.0;
  for (const auto& t : f.as_trig()->terms) s += std::norm(t.coef);
  EXPECT_NEAR(norm_p(f, Measure::lebesgue({{0.0, 1.0}}), ExponentPair(2.0)), std::sqrt(s), 1e-12 * std::sqrt(s));
}

TEST(SemiInnerProduct, CompatibleWithNorm) {
  std::mt19937_64 rng(6);
  const Measure mu = Measure::lebesgue({{0.0, 1.0}});
  for (double p : {1.5, 2.0, 3.0}) {
    for (int i = 0; i < 20; ++i) {
      const TestFunction f = random_trig(rng, 1, 10, 5);
      const double n = norm_p(f, mu, ExponentPair(p));
      const Complex ff = semi_inner_product(f, f, mu, ExponentPair(p));
      EXPECT_NEAR(ff.real(), n * n, 1e-10 * n * n);
      EXPECT_NEAR(ff.imag(), 0.0, 1e-10 * n * n);
    }
  }
}

TEST(SemiInnerProduct, ExponentialSlotIsFourierCoefficient) {
  std::mt19937_64 rng(7);
  const Measure mu = Measure::lebesgue({{0.0, 1.0}});
  const ExponentPair e(1.5);
  for (int i = 0; i < 20; ++i) {
    const TestFunction f = random_trig(rng, 1, 10, 5);
    const Point t = {std::uniform_real_distribution<double>(-12.0, 12.0)(rng)};
    const Complex lhs = semi_inner_product(f, exponential(t), mu, e);
    EXPECT_LT(std::abs(lhs - fourier_coefficient(f, t, mu)), 1e-10);
  }
}

TEST(SemiInnerProduct, Homogeneity) {
  std::mt19937_64 rng(8);
  const Measure mu = Measure::atomic({{{0.0}, 0.3}, {{0.5}, 0.7}, {{1.5}, 1.0}});
  for (double p : {1.5, 3.0}) {
    const TestFunction f = random_atom_samples(rng, mu);
    const TestFunction g = random_atom_samples(rng, mu);
    const Complex a = semi_inner_product(f, g, mu, ExponentPair(p));
    EXPECT_LT(std::abs(semi_inner_product(scaled(f, 2.0), g, mu, ExponentPair(p)) - 2.0 * a), 1e-14);
  }
}

TEST(SemiInnerProduct, RejectsEndpoint) {
  EXPECT_THROW(semi_inner_product(constant_function(1), constant_function(1), two_interval(), ExponentPair(1.0)),
               InvalidArgument);
}

TEST(SemiInnerProduct, SelfSimilarExponential) {
  const Measure mu4 = Measure::self_similar({{4}}, {{0}, {2}}, {0.5, 0.5});
  const Complex v = semi_inner_product(constant_function(1), exponential(Point{0.3}), mu4, ExponentPair(1.5));
  EXPECT_LT(std::abs(v - fourier_stieltjes(mu4, Point{0.3})), 1e-15);
}

TEST(FourierCoefficient, ConstantGivesTransform) {
  for (const Measure& m : {two_interval(), unit_plus_point(), Measure::self_similar({{4}}, {{0}, {2}}, {0.5, 0.5})})
    for (double t : {0.0, 0.4, -2.25})
      EXPECT_LT(std::abs(fourier_coefficient(constant_function(1), Point{t}, m) - fourier_stieltjes(m, Point{t})), 1e-14);
}

TEST(FourierCoefficient, TwoAtomClosedForm) {
  const Measure mu = Measure::atomic({{{0.0}, 0.5}, {{0.5}, 0.5}});
  const TestFunction f = TestFunction::atom_samples(mu, {1.0, 0.0});
  EXPECT_LT(std::abs(fourier_coefficient(f, Point{1.0}, mu) - Complex(0.5, 0.0)), 1e-16);
}

TEST(FourierCoefficient, ModulatedIndicatorModulus) {
  const Measure mu = Measure::lebesgue({{0.0, 1.0}});
  for (double T : {1.0, 10.0, 100.0})
    for (double t : {0.0, 0.3, 2.5, -7.75}) {
      const TestFunction g = modulated_indicator(Point{T}, {{0.0, 1.0}});
      const double x = kPi * (T + t);
      EXPECT_NEAR(std::abs(fourier_coefficient(g, Point{t}, mu)), std::abs(std::sin(x) / x), 1e-14);
    }
}

TEST(FourierCoefficient, ClosedFormMatchesQuadrature) {
  // Piecewise-constant closed form against a smooth density's quadrature.
  const Measure pc = two_interval();
  const Measure smooth = Measure::density({{0.0, 3.0}}, [](PointView x) { return (x[0] < 1.0 || x[0] >= 2.0) ? 0.5 : 0.0; },
                                          DensityOptions{QuadratureSpec{}, {{1.0, 2.0}}, false});
  const TestFunction f = TestFunction::trig({{{1.0}, 1.0}, {{-3.0}, Complex(0.0, 2.0)}}, Box{{0.5, 2.5}});
  for (double t : {0.0, 0.7, -3.1})
    EXPECT_LT(std::abs(fourier_coefficient(f, Point{t}, pc) - fourier_coefficient(f, Point{t}, smooth)), 1e-12);
}

TEST(SupNormTransform, ConstantOnProbabilityIsOne) {
  // An odd grid puts a node at t = 0.
  EXPECT_NEAR(sup_norm_transform(constant_function(1), two_interval(), {{-4.0, 4.0}}, 2049), 1.0, 1e-14);
  EXPECT_LE(sup_norm_transform(constant_function(1), two_interval(), {{-4.0, 4.0}}), 1.0 + 1e-14);
}

TEST(SupNormTransform, BoundedByL1Norm) {
  std::mt19937_64 rng(9);
  const Measure mu = two_interval();
  for (int i = 0; i < 10; ++i) {
    const TestFunction f = random_trig(rng, 1, 8, 4);
    EXPECT_LE(sup_norm_transform(f, mu, {{-10.0, 10.0}}, 512), norm_p(f, mu, ExponentPair(1.0)) + 1e-9);
  }
}

TEST(SupNormTransform, PointIndicatorIsOne) {
  for (int grid : {3, 64, 2048})
    EXPECT_NEAR(sup_norm_transform(point_indicator(Point{2.0}), unit_plus_point(), {{-50.0, 50.0}}, grid), 1.0, 1e-15);
}
