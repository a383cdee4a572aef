#include "fdapower/rng.hpp"

#include <cmath>
#include <stdexcept>

#include "fdapower/errors.hpp"
#include "fdapower/linalg.hpp"
#include "fdapower/probdist.hpp"

namespace fdapower {

namespace {

std::uint64_t splitmix_finalize(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t splitmix_next(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  return splitmix_finalize(state);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

RngStream::RngStream(std::uint64_t seed) : root_(seed) {
  std::uint64_t sm = seed;
  for (auto& word : s_) word = splitmix_next(sm);
}

RngStream RngStream::substream(std::uint64_t index) const {
  // Injective pre-mix of (root, index) followed by a bijective finalizer:
  // distinct indices can never collide for a fixed root.
  std::uint64_t z = root_ + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = splitmix_finalize(z);
  z = splitmix_finalize(z ^ 0xD1B54A32D192ED03ULL);
  return RngStream(z);
}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RngStream::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() { return normal_quantile(uniform()); }

double RngStream::gamma(double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0))
    throw std::invalid_argument("gamma: shape and scale must be positive");
  if (shape < 1.0) {
    const double u = uniform();
    return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return scale * d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return scale * d * v;
  }
}

double RngStream::chisq(double df) { return gamma(df / 2.0, 2.0); }

double RngStream::noncentral_chisq1(double ncp) {
  if (!(ncp >= 0.0)) throw std::invalid_argument("noncentral_chisq1: ncp must be non-negative");
  const double z = normal() + std::sqrt(ncp);
  return z * z;
}

std::vector<double> RngStream::mvn(const std::vector<double>& mean, const Matrix& cov) {
  const std::size_t n = mean.size();
  if (cov.rows() != n || cov.cols() != n) throw std::invalid_argument("mvn: shape mismatch");
  std::vector<double> z(n);
  for (auto& v : z) v = normal();

  Matrix factor(n, n);
  bool have_factor = false;
  try {
    factor = chol_spd(cov);
    have_factor = true;
  } catch (const NotSpdError&) {
  }
  if (!have_factor) {
    const SymEigen eig = sym_eigen(cov);
    const double lam_max = eig.values.empty() ? 0.0 : std::max(eig.values.front(), 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      double lam = eig.values[k];
      if (lam < 0.0) {
        if (lam < -1e-10 * std::max(lam_max, 1e-300))
          throw NotSpdError("mvn: covariance has a significantly negative eigenvalue");
        lam = 0.0;
      }
      const double root = std::sqrt(lam);
      for (std::size_t i = 0; i < n; ++i) factor(i, k) = eig.vectors(i, k) * root;
    }
  }

  std::vector<double> out(mean);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) acc += factor(i, k) * z[k];
    out[i] += acc;
  }
  return out;
}

}  // namespace fdapower
