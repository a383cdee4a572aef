#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "fdapower/matrix.hpp"

namespace fdapower {

// Deterministic xoshiro256++ stream with hash-derived substreams.
// substream(i) depends only on (root seed, i), never on how much of the
// parent stream has been consumed, so replication r of any experiment can
// be computed in isolation and in any order.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  RngStream substream(std::uint64_t index) const;

  std::uint64_t next_u64();

  // Uniform on the open interval (0, 1).
  double uniform();

  // Standard normal via the inverse CDF (one uniform per draw).
  double normal();

  // Gamma(shape, scale) by Marsaglia-Tsang squeeze.
  double gamma(double shape, double scale);

  // Chi-square with real-valued degrees of freedom (gamma(df/2, 2)).
  double chisq(double df);

  // Noncentral chi-square with 1 degree of freedom: (Z + sqrt(ncp))^2.
  double noncentral_chisq1(double ncp);

  // Multivariate normal. Accepts positive semi-definite covariances by
  // clipping eigenvalues in (-1e-10 * max eigenvalue, 0) to zero; more
  // negative eigenvalues raise NotSpdError.
  std::vector<double> mvn(const std::vector<double>& mean, const Matrix& cov);

 private:
  std::uint64_t root_;
  std::array<std::uint64_t, 4> s_;
};

}  // namespace fdapower
