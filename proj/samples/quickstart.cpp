// Estimates the (2,2)-Bessel bounds of the integer lattice against
// Lebesgue measure on [0,1] and compares them with the Holder certificate.

#include <cstdio>

#include "framelab/framelab.hpp"

int main() {
  using namespace framelab;
  const Measure mu = Measure::lebesgue({{0.0, 1.0}});
  const Measure nu = as_atomic_measure(SpectrumSet::lattice(1), 32);
  const ExponentPair e(2.0);

  const BoundEstimate est = estimate_bounds(mu, nu, e, TestFamily::defaults(mu), 400, 1);
  const BoundCertificate holder = holder_bound(mu, nu, e);
  std::printf("lower_hat %.6f  upper_hat %.6f  holder %.1f\n", est.lower_hat, est.upper_hat, holder.upper);

  const TestFunction f = TestFunction::trig({{{3.0}, 1.0}, {{-1.0}, Complex(0.0, 0.5)}});
  std::printf("sum |f^(n)|^2 = %.12f  ||f||^2 = %.12f\n", bessel_functional(f, mu, nu, e),
              std::pow(norm_p(f, mu, e), 2));
  return 0;
}
