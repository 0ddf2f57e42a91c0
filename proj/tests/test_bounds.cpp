#include <gtest/gtest.h>

#include "framelab/framelab.hpp"

using namespace framelab;

namespace {

Measure two_interval() {
  return Measure::piecewise_constant({{0.0, 3.0}}, {{{{0.0, 1.0}}, 0.5}, {{{2.0, 3.0}}, 0.5}});
}

}  // namespace

TEST(BesselFunctional, DiracIsTight) {
  const Measure mu = Measure::dirac({0.0});
  const Measure nu = Measure::atomic({{{-1.0}, 0.5}, {{0.3}, 0.25}, {{2.0}, 1.25}});
  std::mt19937_64 rng(1);
  for (double p : {1.5, 2.0, 4.0}) {
    const ExponentPair e(p);
    const TestFunction f = random_trig(rng, 1, 16, 4);
    EXPECT_NEAR(bessel_functional(f, mu, nu, e), 2.0 * std::pow(norm_p(f, mu, e), e.q()),
                1e-12 * std::pow(norm_p(f, mu, e), e.q()));
  }
}

TEST(BesselFunctional, TwoAtomOrthonormalBasis) {
  const Measure mu = Measure::atomic({{{0.0}, 0.5}, {{0.5}, 0.5}});
  const Measure nu = Measure::atomic({{{0.0}, 1.0}, {{1.0}, 1.0}});
  std::mt19937_64 rng(2);
  for (int i = 0; i < 50; ++i) {
    const TestFunction f = random_atom_samples(rng, mu);
    const auto& v = f.as_atom_samples()->values;
    const double direct = 0.25 * std::norm(v[0] + v[1]) + 0.25 * std::norm(v[0] - v[1]);
    EXPECT_NEAR(bessel_functional(f, mu, nu, ExponentPair(2.0)), direct, 1e-14);
    EXPECT_NEAR(direct, 0.5 * (std::norm(v[0]) + std::norm(v[1])), 1e-13);
  }
}

TEST(BesselFunctional, TwoIntervalIndicator) {
  // 1/4 from lambda = 0 plus sum_n 1/(8 pi^2 (n + 1/4)^2) = 1/4.
  const auto s = SpectrumSet::shifted_union(SpectrumSet::lattice(1), {{0.0}, {0.25}});
  const double v = bessel_functional(indicator({{0.0, 1.0}}), two_interval(), s, 2000, ExponentPair(2.0));
  double tail = 0.0;
  for (long n = 2000; n < 4000000; ++n) tail += 1.0 / (8 * kPi * kPi) * (1.0 / std::pow(n + 1.25, 2) + 1.0 / std::pow(n + 0.75, 2));
  EXPECT_NEAR(v + tail, 0.5, 1e-7);
  EXPECT_LT(v, 0.5);
}

TEST(BesselFunctional, RejectsEndpoint) {
  EXPECT_THROW(bessel_functional(constant_function(1), two_interval(), Measure::dirac({0.0}), ExponentPair(1.0)),
               InvalidArgument);
}

TEST(EstimateBounds, DiracLowerEqualsUpper) {
  const Measure mu = Measure::dirac({0.0});
  const Measure nu = Measure::atomic({{{-1.0}, 0.5}, {{0.3}, 0.5}, {{2.0}, 1.0}});
  const BoundEstimate est = estimate_bounds(mu, nu, ExponentPair(1.5), TestFamily::defaults(mu), 600, 3);
  EXPECT_NEAR(est.lower_hat, 2.0, 1e-12);
  EXPECT_NEAR(est.upper_hat, 2.0, 1e-12);
  EXPECT_LE(est.sample_count, 600u);
  EXPECT_FALSE(est.rows.empty());
}

TEST(EstimateBounds, Deterministic) {
  const Measure mu = Measure::atomic({{{0.0}, 0.5}, {{0.5}, 0.5}});
  const Measure nu = Measure::atomic({{{0.0}, 1.0}, {{1.3}, 1.0}});
  const auto a = estimate_bounds(mu, nu, ExponentPair(3.0), TestFamily::defaults(mu), 500, 11);
  const auto b = estimate_bounds(mu, nu, ExponentPair(3.0), TestFamily::defaults(mu), 500, 11);
  EXPECT_EQ(to_csv(a), to_csv(b));
  EXPECT_EQ(to_csv(a).substr(0, csv_header().size()), csv_header());
}

TEST(EstimateBounds, ModulatedFamilyDrivesLowerBoundDown) {
  const Measure mu = Measure::sum({Measure::lebesgue({{0.0, 1.0}}), Measure::dirac({2.0})});
  const Measure nu = Measure::atomic({{{1.0 / 3.0}, 0.5}, {{-0.5}, 0.5}});
  double prev = kInf;
  for (double T : {1.0, 10.0, 100.0}) {
    TestFamily fam;
    fam.trig = false;
    fam.modulations = {{T}};
    const auto est = estimate_bounds(mu, nu, ExponentPair(2.0), fam, 4, 0);
    EXPECT_LT(est.lower_hat, prev);
    prev = est.lower_hat;
  }
  EXPECT_LT(prev, 1e-4);
}

TEST(EstimateBounds, TwoIntervalEstimatesApproachOne) {
  const Measure mu = two_interval();
  const auto s = SpectrumSet::shifted_union(SpectrumSet::lattice(1), {{0.0}, {0.25}});
  std::vector<double> lowers;
  for (int level : {8, 64}) {
    TestFamily fam;
    fam.trig_window = 4;
    fam.trig_terms = 3;
    fam.modulations = {{1.0}, {10.0}};
    fam.starts = 6;
    fam.refine_steps = 4;
    const auto est = estimate_bounds(mu, as_atomic_measure(s, level), ExponentPair(2.0), fam, 60, 5, level);
    EXPECT_LE(est.upper_hat, 1.0 + 1e-9);
    lowers.push_back(est.lower_hat);
  }
  EXPECT_GT(lowers[1], lowers[0]);
  EXPECT_GT(lowers[1], 0.97);
}

TEST(EstimateBounds, DegenerateFamilyThrows) {
  const Measure mu = Measure::lebesgue({{0.0, 1.0}});
  TestFamily fam;
  fam.trig = false;
  fam.fixed = {point_indicator(Point{5.0})};
  EXPECT_THROW(estimate_bounds(mu, Measure::dirac({0.0}), ExponentPair(2.0), fam, 10, 0), DegenerateFamily);
}

TEST(Holder, Values) {
  const Measure p = Measure::dirac({0.0});
  EXPECT_DOUBLE_EQ(holder_bound(p, Measure::dirac({3.0}), ExponentPair(1.5)).upper, 1.0);
  const Measure a = Measure::dirac({0.0}, 2.0), b = Measure::dirac({0.0}, 3.0);
  EXPECT_DOUBLE_EQ(holder_bound(a, b, ExponentPair(2.0)).upper, 6.0);
}

TEST(Holder, DominatesEstimates) {
  std::mt19937_64 rng(4);
  const Measure mu = Measure::atomic({{{0.0}, 0.7}, {{0.9}, 0.4}});
  const Measure nu = Measure::atomic({{{0.1}, 1.1}, {{-2.0}, 0.6}, {{4.0}, 0.3}});
  for (double p : {1.5, 2.0, 3.0}) {
    const auto est = estimate_bounds(mu, nu, ExponentPair(p), TestFamily::defaults(mu), 300, 9);
    EXPECT_LE(est.upper_hat, holder_bound(mu, nu, ExponentPair(p)).upper * (1.0 + 1e-12));
  }
}

TEST(RieszThorin, EndpointInterpolation) {
  const auto [e, c] = riesz_thorin(ExponentPair(1.0), 1.0, ExponentPair(2.0), 1.0, 0.5);
  EXPECT_NEAR(e.p(), 4.0 / 3.0, 1e-15);
  EXPECT_NEAR(e.q(), 4.0, 1e-12);
  EXPECT_LE(c.upper, 1.0);
}

TEST(RieszThorin, OperatorNormArithmetic) {
  const auto [e, c] = riesz_thorin(ExponentPair(1.0), 4.0, ExponentPair(2.0), 1.0, 0.5);
  EXPECT_NEAR(*c.premise("operator_norm"), 2.0, 1e-14);
  EXPECT_NEAR(c.upper, std::pow(2.0, e.q()), 1e-12);
  const auto [e2, c2] = riesz_thorin(ExponentPair(1.0), 1.0, ExponentPair(2.0), 1.0, 2.0 / 3.0);
  EXPECT_NEAR(e2.p(), 1.5, 1e-15);
  EXPECT_NEAR(e2.q(), 3.0, 1e-12);
  EXPECT_THROW(riesz_thorin(ExponentPair(1.0), 1.0, ExponentPair(2.0), 1.0, 0.0), InvalidArgument);
  EXPECT_THROW(riesz_thorin(ExponentPair(1.0), 1.0, ExponentPair(2.0), 1.0, 1.0), InvalidArgument);
}

TEST(Perturbation, ZeroRadiusKeepsBound) {
  EXPECT_DOUBLE_EQ(perturbation_bound(3.0, ExponentPair(2.0), 0.0, 0.5).upper, 3.0);
}

TEST(Perturbation, PlugInValue) {
  // (1 + ((e^{1e-4} - 1)(e^{pi^2} - 1))^{1/2})^2, evaluated in 40-digit arithmetic.
  EXPECT_NEAR(perturbation_bound(1.0, ExponentPair(2.0), 0.01, 0.5).upper, 5.714275910022219, 1e-12);
}

TEST(Perturbation, CertificateDominatesPerturbedLattice) {
  const Measure mu = Measure::lebesgue({{0.0, 1.0}});
  const double C = 0.05;
  const Measure nu = as_atomic_measure(perturb(SpectrumSet::lattice(1), C, 17), 32);
  const auto cert = perturbation_bound(1.0, ExponentPair(2.0), C, 0.5);
  TestFamily fam;
  fam.starts = 10;
  fam.refine_steps = 10;
  const auto est = estimate_bounds(mu, nu, ExponentPair(2.0), fam, 200, 1);
  EXPECT_LE(est.upper_hat, cert.upper);
}

TEST(WeightedExponential, Factors) {
  const auto one = weighted_exponential_bound(1.0, 1.0, ExponentPair(1.5), 1.0, 1.0);
  EXPECT_NEAR(one.upper, 1.0, 1e-15);
  EXPECT_NEAR(*one.lower, 1.0, 1e-15);
  const auto two = weighted_exponential_bound(0.5, 3.0, ExponentPair(2.0), 1.0, 1.0);
  EXPECT_NEAR(two.upper, 9.0, 1e-14);
  EXPECT_NEAR(*two.lower, 0.25, 1e-15);
}

TEST(WeightedExponential, DoubledWeightSweep) {
  // phi = 2 on [0,1]: sum |[f, 2 e_n]|^2 <= 4 ||f||^2.
  const Measure mu = Measure::lebesgue({{0.0, 1.0}});
  const auto cert = weighted_exponential_bound(2.0, 2.0, ExponentPair(2.0), 1.0, 1.0);
  std::mt19937_64 rng(12);
  for (int i = 0; i < 20; ++i) {
    const TestFunction f = random_trig(rng, 1, 12, 5);
    double s = 0.0;
    for (int n = -20; n <= 20; ++n) {
      const TestFunction g = exponential(Point{double(n)}, 2.0);
      s += std::norm(semi_inner_product(f, g, mu, ExponentPair(2.0)));
    }
    EXPECT_LE(s, cert.upper * std::pow(norm_p(f, mu, ExponentPair(2.0)), 2) * (1.0 + 1e-12));
  }
}

TEST(Deconvolution, DiracLeavesNuUnchanged) {
  const Measure nu = Measure::atomic({{{0.0}, 1.0}, {{0.7}, 2.0}});
  const Measure w = deconvolution_weight(nu, Measure::dirac({0.0}), ExponentPair(2.0));
  ASSERT_EQ(w.as_atomic()->atoms.size(), 2u);
  EXPECT_DOUBLE_EQ(w.as_atomic()->atoms[1].w, 2.0);
}

TEST(Deconvolution, UnitIntervalKeepsOnlyOrigin) {
  const Measure nu = as_atomic_measure(SpectrumSet::lattice(1), 10);
  const Measure w = deconvolution_weight(nu, Measure::lebesgue({{0.0, 1.0}}), ExponentPair(2.0));
  double others = 0.0;
  for (const auto& a : w.as_atomic()->atoms) {
    if (a.x[0] == 0.0) EXPECT_NEAR(a.w, 1.0, 1e-15);
    else others += a.w;
  }
  EXPECT_LT(others, 1e-30);
}

TEST(Deconvolution, EstimateBelowConvolvedCertificate) {
  const Measure mu = Measure::atomic({{{0.0}, 0.5}, {{0.5}, 0.5}});
  const Measure mu_prime = Measure::atomic({{{0.0}, 0.5}, {{0.25}, 0.5}});
  const Measure nu = Measure::atomic({{{0.0}, 1.0}, {{1.0}, 1.0}, {{0.5}, 0.5}});
  const ExponentPair e(2.0);
  const Measure rho = convolve(mu, mu_prime);
  const double B = holder_bound(rho, nu, e).upper;
  const auto est = estimate_bounds(mu, deconvolution_weight(nu, mu_prime, e), e, TestFamily::defaults(mu), 400, 2);
  EXPECT_LE(est.upper_hat, deconvolution_bound(B, e).upper * (1.0 + 1e-12));
}

TEST(Envelope, SandwichAndSmallRadiusLimit) {
  const Measure mu = two_interval();
  const Measure nu = Measure::atomic({{{0.1}, 1.0}, {{1.3}, 0.5}, {{-2.2}, 2.0}});
  std::mt19937_64 rng(13);
  const ExponentPair e(2.0);
  for (int i = 0; i < 10; ++i) {
    const TestFunction f = random_trig(rng, 1, 8, 4);
    const double v = bessel_functional(f, mu, nu, e);
    const auto env = envelope_functional(f, mu, nu, e, 0.3);
    EXPECT_LE(env.inf_sum, v * (1.0 + 1e-12));
    EXPECT_GE(env.sup_sum, v * (1.0 - 1e-12));
    const auto tiny = envelope_functional(f, mu, nu, e, 1e-7);
    EXPECT_NEAR(tiny.inf_sum, v, 1e-5 * v);
    EXPECT_NEAR(tiny.sup_sum, v, 1e-5 * v);
  }
}

TEST(SigmaProbe, HeavyAtomIsReported) {
  const Measure mu = Measure::lebesgue({{0.0, 1.0}});
  const Measure nu = Measure::atomic({{{0.0}, 1.0}, {{3.0}, 50.0}});
  const auto rep = sigma_finiteness_probe(nu, mu, ExponentPair(2.0), 1.0, 0.0, {{-5.0, 5.0}});
  EXPECT_FALSE(rep.pass());
  EXPECT_DOUBLE_EQ(rep.delta, 1.0);
}

TEST(SigmaProbe, LatticePasses) {
  const Measure mu = Measure::lebesgue({{0.0, 1.0}});
  const Measure nu = as_atomic_measure(SpectrumSet::lattice(1), 30);
  const auto rep = sigma_finiteness_probe(nu, mu, ExponentPair(2.0), 1.0, 0.5, {{-20.0, 20.0}});
  EXPECT_TRUE(rep.pass());
  EXPECT_NEAR(rep.delta, 0.25, 1e-15);
}

TEST(Certificates, ScalingAndConvolution) {
  EXPECT_DOUBLE_EQ(scaling_bound(2.0, ExponentPair(2.0), 1.5).upper, 3.0);
  EXPECT_DOUBLE_EQ(*scaling_bound(2.0, ExponentPair(2.0), 1.5, 0.5).lower, 1.0);
  EXPECT_DOUBLE_EQ(convolution_closure_bound(3.0, ExponentPair(2.0)).upper, 3.0);
}
