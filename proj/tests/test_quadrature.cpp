#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss.hpp>

#include "framelab/framelab.hpp"

using namespace framelab;

namespace {

template <unsigned N>
void expect_matches_boost() {
  const GaussRule& r = gauss_legendre(static_cast<int>(N));
  const auto& x = boost::math::quadrature::gauss<double, N>::abscissa();
  const auto& w = boost::math::quadrature::gauss<double, N>::weights();
  // Boost stores the nonnegative half, starting at the centre.
  for (std::size_t k = 0; k < x.size(); ++k) {
    const std::size_t idx = N / 2 + k;
    EXPECT_NEAR(r.nodes[idx], x[k], 1e-15) << "N=" << N << " k=" << k;
    EXPECT_NEAR(r.weights[idx], w[k], 1e-15) << "N=" << N << " k=" << k;
  }
}

}  // namespace

TEST(GaussLegendre, MatchesBoostTables) {
  expect_matches_boost<7>();
  expect_matches_boost<8>();
  expect_matches_boost<16>();
  expect_matches_boost<20>();
}

TEST(GaussLegendre, RejectsBadOrder) {
  EXPECT_THROW(gauss_legendre(0), InvalidArgument);
  EXPECT_THROW(gauss_legendre(257), InvalidArgument);
}

TEST(TensorGrid, IntegratesTrigPolynomialsOnUnitInterval) {
  // Default rule: error below 1e-9 for degree up to 64.
  const PointCloud g = tensor_grid({{0.0, 1.0}}, {}, QuadratureSpec{});
  for (int n : {1, 7, 32, 63, 64}) {
    Complex s{0.0, 0.0};
    for (std::size_t i = 0; i < g.size(); ++i) s += g.weights[i] * std::exp(Complex(0.0, kTwoPi * n * g.point(i)[0]));
    EXPECT_LT(std::abs(s), 1e-9) << n;
  }
  // Non-integer frequency against the closed form.
  const double w = 40.3;
  Complex s{0.0, 0.0};
  for (std::size_t i = 0; i < g.size(); ++i) s += g.weights[i] * std::exp(Complex(0.0, kTwoPi * w * g.point(i)[0]));
  const Complex exact = (std::exp(Complex(0.0, kTwoPi * w)) - 1.0) / Complex(0.0, kTwoPi * w);
  EXPECT_LT(std::abs(s - exact), 1e-12);
}

TEST(TensorGrid, KnotsBecomePanelEdges) {
  const PointCloud g = tensor_grid({{0.0, 1.0}}, {{0.3}}, QuadratureSpec{1, 4});
  double below = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g.point(i)[0] < 0.3) below += g.weights[i];
  EXPECT_NEAR(below, 0.3, 1e-15);
}

TEST(BoxExponential, MatchesQuadrature) {
  const Box b = {{-0.4, 1.3}, {0.2, 0.9}};
  const Point omega = {2.7, -5.1};
  const PointCloud g = tensor_grid(b, {}, QuadratureSpec{});
  Complex s{0.0, 0.0};
  for (std::size_t i = 0; i < g.size(); ++i)
    s += g.weights[i] * std::exp(Complex(0.0, kTwoPi * dot(omega, g.point(i))));
  EXPECT_LT(std::abs(box_exponential(b, omega) - s), 1e-12);
  EXPECT_NEAR(box_exponential(b, Point{0.0, 0.0}).real(), box_volume(b), 1e-15);
}

TEST(Core, ExponentPairs) {
  EXPECT_DOUBLE_EQ(ExponentPair(2.0).q(), 2.0);
  EXPECT_DOUBLE_EQ(ExponentPair(1.5).q(), 3.0);
  EXPECT_TRUE(std::isinf(ExponentPair(1.0).q()));
  EXPECT_TRUE(ExponentPair(1.0).is_endpoint());
  EXPECT_DOUBLE_EQ(ExponentPair::from_q(4.0).p(), 4.0 / 3.0);
  EXPECT_THROW(ExponentPair(0.5), InvalidArgument);
}

TEST(Core, HalfOpenBoxes) {
  const Box b = {{0.0, 1.0}};
  EXPECT_TRUE(box_contains(b, Point{0.0}));
  EXPECT_FALSE(box_contains(b, Point{1.0}));
  EXPECT_TRUE(box_contains_closed(b, Point{1.0}));
  EXPECT_THROW(validate_box({{1.0, 0.0}}), InvalidArgument);
}
