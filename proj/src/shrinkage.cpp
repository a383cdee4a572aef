#include "fdapower/shrinkage.hpp"

#include <cmath>
#include <stdexcept>

#include "fdapower/errors.hpp"
#include "fdapower/linalg.hpp"

namespace fdapower {

namespace {

Matrix basis_at(const EigenSystem& eig, const std::vector<double>& times) {
  Matrix psi(times.size(), static_cast<std::size_t>(eig.K));
  for (std::size_t j = 0; j < times.size(); ++j)
    for (int k = 0; k < eig.K; ++k)
      psi(j, static_cast<std::size_t>(k)) = eig.eval(k, times[j]);
  return psi;
}

// M = S (Psi'Psi) S + tau2 I with S = diag(sqrt(lambda)). Solving against M
// is algebraically identical to solving against the m x m observation
// covariance G = Psi diag(lambda) Psi' + tau2 I via
//   diag(lambda) Psi' G^{-1} = S M^{-1} S Psi',
// but M stays positive definite even when tau2 reaches zero (as long as Psi
// has full column rank), whereas G is rank-deficient whenever m > K.
Matrix shrink_system(const EigenSystem& eig, const Matrix& psi, const std::vector<double>& s,
                     double tau2) {
  const std::size_t k = static_cast<std::size_t>(eig.K);
  Matrix m(k, k);
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t q = p; q < k; ++q) {
      double acc = 0.0;
      for (std::size_t j = 0; j < psi.rows(); ++j) acc += psi(j, p) * psi(j, q);
      m(p, q) = s[p] * s[q] * acc;
      m(q, p) = m(p, q);
    }
  for (std::size_t p = 0; p < k; ++p) m(p, p) += tau2;
  return m;
}

std::vector<double> sqrt_values(const EigenSystem& eig) {
  std::vector<double> s(eig.values.size());
  for (std::size_t k = 0; k < s.size(); ++k) s[k] = std::sqrt(eig.values[k]);
  return s;
}

}  // namespace

std::vector<double> blup_scores(const std::vector<double>& times,
                                const std::vector<double>& values, const EigenSystem& eig,
                                double tau2, const std::function<double(double)>& mu0) {
  if (times.empty() || times.size() != values.size())
    throw std::invalid_argument("blup_scores: times and values must match and be non-empty");
  if (!(tau2 >= 0.0)) throw std::invalid_argument("blup_scores: tau2 must be >= 0");

  const Matrix psi = basis_at(eig, times);
  const std::vector<double> s = sqrt_values(eig);
  const std::size_t k = static_cast<std::size_t>(eig.K);

  std::vector<double> centered(values);
  if (mu0)
    for (std::size_t j = 0; j < times.size(); ++j) centered[j] -= mu0(times[j]);

  // zeta = S M^{-1} S Psi' (y - mu0)
  std::vector<double> rhs(k, 0.0);
  for (std::size_t p = 0; p < k; ++p) {
    double acc = 0.0;
    for (std::size_t j = 0; j < times.size(); ++j) acc += psi(j, p) * centered[j];
    rhs[p] = s[p] * acc;
  }

  std::vector<double> zeta;
  try {
    zeta = spd_solve(shrink_system(eig, psi, s, tau2), rhs);
  } catch (const NotSpdError&) {
    throw NotSpdError("blup_scores: shrinkage system is singular");
  }
  for (std::size_t p = 0; p < k; ++p) zeta[p] *= s[p];
  return zeta;
}

Matrix score_cov_mc(RngStream& rng, const EigenSystem& eig, const SamplingDesign& design,
                    const MeanDiff* offset, double tau2, int s) {
  if (s < 2) throw std::invalid_argument("score_cov_mc: need at least 2 design draws");
  design.validate();
  const std::size_t k = static_cast<std::size_t>(eig.K);

  Matrix first(k, k);
  Matrix outer(k, k);
  std::vector<double> vsum(k, 0.0);
  const bool has_offset = offset != nullptr && !offset->is_zero();

  const std::vector<double> sq = sqrt_values(eig);
  for (int draw = 0; draw < s; ++draw) {
    RngStream sub = rng.substream(static_cast<std::uint64_t>(draw));
    const std::vector<double> times = design.draw_times(sub);
    const Matrix psi = basis_at(eig, times);
    const Matrix l = chol_spd(shrink_system(eig, psi, sq, tau2));

    // First term: diag(lambda) Psi' G^{-1} Psi diag(lambda)
    //           = Lambda - tau2 * S M^{-1} S.
    for (std::size_t q = 0; q < k; ++q) {
      std::vector<double> rhs(k, 0.0);
      rhs[q] = sq[q];
      const std::vector<double> col = chol_solve(l, rhs);
      for (std::size_t p = 0; p <= q; ++p) {
        double acc = -tau2 * sq[p] * col[p];
        if (p == q) acc += eig.values[p];
        first(p, q) += acc;
        if (q != p) first(q, p) += acc;
      }
    }

    if (has_offset) {
      // v = diag(lambda) Psi' G^{-1} eta(T) = S M^{-1} S Psi' eta(T)
      std::vector<double> off(times.size());
      for (std::size_t j = 0; j < times.size(); ++j) off[j] = (*offset)(times[j]);
      std::vector<double> rhs(k, 0.0);
      for (std::size_t p = 0; p < k; ++p) {
        double acc = 0.0;
        for (std::size_t j = 0; j < times.size(); ++j) acc += psi(j, p) * off[j];
        rhs[p] = sq[p] * acc;
      }
      std::vector<double> v = chol_solve(l, rhs);
      for (std::size_t p = 0; p < k; ++p) v[p] *= sq[p];
      for (std::size_t p = 0; p < k; ++p) {
        vsum[p] += v[p];
        for (std::size_t q = p; q < k; ++q) outer(p, q) += v[p] * v[q];
      }
    }
  }

  Matrix lambda = first.scaled(1.0 / s);
  if (has_offset) {
    // Sample covariance of the offset projections across designs.
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t q = p; q < k; ++q) {
        const double cov = (outer(p, q) - vsum[p] * vsum[q] / s) / (s - 1.0);
        lambda(p, q) += cov;
        if (q != p) lambda(q, p) += cov;
      }
  }
  lambda.symmetrize();
  return lambda;
}

ScoreCov score_cov_empirical(const Matrix& scores) {
  const std::size_t n = scores.rows();
  const std::size_t k = scores.cols();
  if (n < 2) throw std::invalid_argument("score_cov_empirical: need at least 2 subjects");

  ScoreCov out;
  out.mean.assign(k, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j) out.mean[j] += scores(i, j);
  for (double& m : out.mean) m /= static_cast<double>(n);

  out.cov = Matrix(k, k);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      const double dp = scores(i, p) - out.mean[p];
      for (std::size_t q = p; q < k; ++q) out.cov(p, q) += dp * (scores(i, q) - out.mean[q]);
    }
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t q = p; q < k; ++q) {
      out.cov(p, q) /= static_cast<double>(n - 1);
      out.cov(q, p) = out.cov(p, q);
    }
  return out;
}

}  // namespace fdapower
