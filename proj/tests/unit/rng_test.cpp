#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "fdapower/errors.hpp"
#include "fdapower/matrix.hpp"
#include "fdapower/rng.hpp"

using namespace fdapower;

TEST_CASE("streams are deterministic and substreams ignore parent consumption") {
  RngStream a(42);
  RngStream b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  // a has consumed 100 values, b2 none: substreams must still agree.
  RngStream b2(42);
  RngStream sub_a = a.substream(7);
  RngStream sub_b = b2.substream(7);
  for (int i = 0; i < 50; ++i) CHECK(sub_a.next_u64() == sub_b.next_u64());

  RngStream s0 = b2.substream(0);
  RngStream s1 = b2.substream(1);
  CHECK(s0.next_u64() != s1.next_u64());

  CHECK(RngStream(42).next_u64() != RngStream(43).next_u64());
}

TEST_CASE("uniform draws have the right range, moments and distribution") {
  RngStream rng(7);
  const int n = 100000;
  double sum = 0.0, sumsq = 0.0;
  std::vector<double> draws(n);
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
    draws[i] = u;
    sum += u;
    sumsq += u * u;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
  CHECK(var == doctest::Approx(1.0 / 12.0).epsilon(0.03));

  // Kolmogorov-Smirnov against the uniform CDF.
  std::sort(draws.begin(), draws.end());
  double d = 0.0;
  for (int i = 0; i < n; ++i) {
    d = std::max(d, std::fabs(draws[i] - (i + 1.0) / n));
    d = std::max(d, std::fabs(draws[i] - static_cast<double>(i) / n));
  }
  CHECK(d * std::sqrt(static_cast<double>(n)) < 1.95);  // ~ 0.001 level
}

TEST_CASE("normal, gamma, chi-square and noncentral draws match their moments") {
  RngStream rng(11);
  const int n = 200000;

  double m1 = 0.0, m2 = 0.0, m4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    m1 += z;
    m2 += z * z;
    m4 += z * z * z * z;
  }
  CHECK(m1 / n == doctest::Approx(0.0).epsilon(1).scale(0.01));
  CHECK(m2 / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(m4 / n == doctest::Approx(3.0).epsilon(0.05));

  for (double shape : {0.7, 3.5}) {
    const double scale = 1.7;
    double s = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double g = rng.gamma(shape, scale);
      CHECK(g > 0.0);
      s += g;
      sq += g * g;
    }
    const double mean = s / n;
    CHECK(mean == doctest::Approx(shape * scale).epsilon(0.02));
    CHECK(sq / n - mean * mean == doctest::Approx(shape * scale * scale).epsilon(0.05));
  }

  double c = 0.0;
  for (int i = 0; i < n; ++i) c += rng.chisq(4.5);
  CHECK(c / n == doctest::Approx(4.5).epsilon(0.02));

  double nc = 0.0;
  for (int i = 0; i < n; ++i) nc += rng.noncentral_chisq1(2.25);
  CHECK(nc / n == doctest::Approx(3.25).epsilon(0.02));
}

TEST_CASE("multivariate normal recovers mean and covariance") {
  RngStream rng(5);
  Matrix cov(2, 2);
  cov(0, 0) = 2.0;
  cov(0, 1) = cov(1, 0) = 0.7;
  cov(1, 1) = 1.0;
  const std::vector<double> mean = {1.0, -2.0};

  const int n = 50000;
  double s0 = 0.0, s1 = 0.0, s00 = 0.0, s01 = 0.0, s11 = 0.0;
  for (int i = 0; i < n; ++i) {
    const std::vector<double> x = rng.mvn(mean, cov);
    s0 += x[0];
    s1 += x[1];
    s00 += (x[0] - 1.0) * (x[0] - 1.0);
    s01 += (x[0] - 1.0) * (x[1] + 2.0);
    s11 += (x[1] + 2.0) * (x[1] + 2.0);
  }
  CHECK(s0 / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(s1 / n == doctest::Approx(-2.0).epsilon(0.02));
  CHECK(s00 / n == doctest::Approx(2.0).epsilon(0.05));
  CHECK(s01 / n == doctest::Approx(0.7).epsilon(0.08));
  CHECK(s11 / n == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("multivariate normal accepts semi-definite but rejects indefinite covariances") {
  RngStream rng(9);
  Matrix psd(2, 2);  // rank one: perfectly correlated pair
  psd(0, 0) = psd(0, 1) = psd(1, 0) = psd(1, 1) = 1.0;
  for (int i = 0; i < 200; ++i) {
    const std::vector<double> x = rng.mvn({0.0, 0.0}, psd);
    CHECK(x[0] == doctest::Approx(x[1]).epsilon(1e-9));
  }

  Matrix indef(2, 2);
  indef(0, 0) = 1.0;
  indef(1, 1) = -1.0;
  CHECK_THROWS_AS(rng.mvn({0.0, 0.0}, indef), NotSpdError);
}
