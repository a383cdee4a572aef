#include <cmath>

#include "doctest.h"
#include "fdapower/probdist.hpp"

using namespace fdapower;

TEST_CASE("normal cdf and quantile against classic values") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-10));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-10));
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0));

  for (double p : {1e-8, 1e-3, 0.12, 0.5, 0.77, 1.0 - 1e-3, 1.0 - 1e-8})
    CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-11));
}

TEST_CASE("regularized incomplete beta and gamma identities") {
  // Symmetry I_x(a, b) = 1 - I_{1-x}(b, a).
  for (double x : {0.05, 0.3, 0.71, 0.97})
    for (double a : {0.5, 2.0, 9.0})
      for (double b : {1.0, 4.5})
        CHECK(reg_inc_beta(a, b, x) ==
              doctest::Approx(1.0 - reg_inc_beta(b, a, 1.0 - x)).epsilon(1e-11));

  // I_x(1, b) = 1 - (1-x)^b.
  CHECK(reg_inc_beta(1.0, 3.0, 0.2) == doctest::Approx(1.0 - std::pow(0.8, 3)).epsilon(1e-12));

  // P(1/2, x) = 2 Phi(sqrt(2x)) - 1 and P(1, x) = 1 - exp(-x).
  for (double x : {0.1, 0.9, 3.0}) {
    CHECK(reg_lower_gamma(0.5, x) ==
          doctest::Approx(2.0 * normal_cdf(std::sqrt(2.0 * x)) - 1.0).epsilon(1e-10));
    CHECK(reg_lower_gamma(1.0, x) == doctest::Approx(1.0 - std::exp(-x)).epsilon(1e-12));
  }
}

TEST_CASE("chi-square cdf/quantile round trip and known quantiles") {
  CHECK(chisq_quantile(0.95, 1.0) == doctest::Approx(3.841458820694124).epsilon(1e-10));
  CHECK(chisq_quantile(0.95, 2.0) == doctest::Approx(5.991464547107979).epsilon(1e-10));

  for (double df : {1.0, 2.5, 7.0, 98.0})
    for (double p : {0.001, 0.05, 0.5, 0.95, 0.999}) {
      const double q = chisq_quantile(p, df);
      CHECK(chisq_cdf(q, df) == doctest::Approx(p).epsilon(1e-9));
    }
}

TEST_CASE("f quantiles against reference values") {
  // F(1, huge) -> chi-square(1); median of F(d, d) is exactly 1.
  CHECK(f_quantile(0.95, 1.0, 1e6) == doctest::Approx(3.8415).epsilon(2e-4));
  for (double d : {1.0, 2.0, 7.0, 33.0})
    CHECK(f_quantile(0.5, d, d) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(f_quantile(0.95, 2.0, 10.0) == doctest::Approx(4.102821015450404).epsilon(1e-9));
  CHECK(f_quantile(0.95, 2.0, 97.0) == doctest::Approx(3.090187).epsilon(1e-5));
}

TEST_CASE("f cdf/quantile round trip stays below 1e-9 across a df and p grid") {
  double worst = 0.0;
  for (double d1 : {1.0, 2.0, 5.0, 17.0})
    for (double d2 : {1.0, 3.0, 40.0, 200.0})
      for (double p : {0.001, 0.01, 0.1, 0.5, 0.9, 0.95, 0.99, 0.999}) {
        const double q = f_quantile(p, d1, d2);
        worst = std::max(worst, std::fabs(f_cdf(q, d1, d2) - p));
      }
  CHECK(worst <= 1e-9);
}

TEST_CASE("scaled-f p-value matches the null rule threshold") {
  const int k = 2;
  const int n = 100;
  // T at the 0.95 point of its null law has p-value exactly 0.05.
  const double t = (n - 2.0) * k / (n - k - 1.0) * f_quantile(0.95, k, n - k - 1.0);
  CHECK(scaled_f_pvalue(t, k, n) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(scaled_f_pvalue(0.0, k, n) == doctest::Approx(1.0));
  CHECK(scaled_f_pvalue(1e9, k, n) < 1e-12);
}
