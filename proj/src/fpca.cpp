#include "fdapower/fpca.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fdapower/errors.hpp"
#include "fdapower/linalg.hpp"
#include "fdapower/shrinkage.hpp"

namespace fdapower {

namespace {

double epanechnikov(double u) {
  const double a = std::fabs(u);
  return a < 1.0 ? 0.75 * (1.0 - a * a) : 0.0;
}

// Local-linear estimate at one point from a sorted observation window.
double local_linear_at(const std::vector<std::pair<double, double>>& obs, double t,
                       double bandwidth) {
  for (double bw = bandwidth; bw <= 16.0 * bandwidth; bw *= 2.0) {
    const auto lo = std::lower_bound(obs.begin(), obs.end(), std::make_pair(t - bw, -1e300));
    const auto hi = std::upper_bound(obs.begin(), obs.end(), std::make_pair(t + bw, 1e300));
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, t0 = 0.0, t1 = 0.0;
    for (auto it = lo; it != hi; ++it) {
      const double w = epanechnikov((it->first - t) / bw);
      if (w <= 0.0) continue;
      const double d = it->first - t;
      s0 += w;
      s1 += w * d;
      s2 += w * d * d;
      t0 += w * it->second;
      t1 += w * d * it->second;
    }
    if (s0 <= 0.0) continue;
    const double denom = s2 * s0 - s1 * s1;
    if (denom > 1e-10 * (s0 * s0 * bw * bw * bw * bw + 1e-300))
      return (s2 * t0 - s1 * t1) / denom;
    return t0 / s0;  // degenerate one-sided cluster: kernel-weighted mean
  }
  throw NumericError("estimate_mean: no observations near grid point");
}

}  // namespace

double interp_curve(const std::vector<double>& grid, const std::vector<double>& values,
                    double t) {
  if (t <= grid.front()) return values.front();
  if (t >= grid.back()) return values.back();
  const auto it = std::upper_bound(grid.begin(), grid.end(), t);
  const std::size_t hi = static_cast<std::size_t>(it - grid.begin());
  const double w = (t - grid[hi - 1]) / (grid[hi] - grid[hi - 1]);
  return (1.0 - w) * values[hi - 1] + w * values[hi];
}

std::vector<double> estimate_mean(std::vector<std::pair<double, double>> obs,
                                  const std::vector<double>& grid, double bandwidth) {
  if (obs.empty()) throw std::invalid_argument("estimate_mean: no observations");
  if (!(bandwidth > 0.0)) throw std::invalid_argument("estimate_mean: bandwidth must be positive");
  std::sort(obs.begin(), obs.end());
  std::vector<double> out(grid.size());
  for (std::size_t r = 0; r < grid.size(); ++r) out[r] = local_linear_at(obs, grid[r], bandwidth);
  return out;
}

CovarianceEstimate estimate_covariance(const SparseDataset& data,
                                       const std::vector<double>& grid,
                                       const std::vector<double>& mean_group1,
                                       const std::vector<double>& mean_group2,
                                       double bandwidth, double diag_band,
                                       CovSmoother smoother) {
  const std::size_t r = grid.size();
  if (r < 2) throw std::invalid_argument("estimate_covariance: need >= 2 grid points");
  if (!(bandwidth > 0.0))
    throw std::invalid_argument("estimate_covariance: bandwidth must be positive");

  // Bin raw residual cross-products by nearest midpoint cell.
  Matrix pair_sum(r, r);
  Matrix pair_count(r, r);
  std::vector<std::pair<double, double>> raw_sq;  // (time, residual^2)

  const double cells = static_cast<double>(r);
  auto bin_of = [&](double t) {
    const int b = static_cast<int>(t * cells);
    return static_cast<std::size_t>(std::clamp(b, 0, static_cast<int>(r) - 1));
  };

  std::vector<double> resid;
  std::vector<std::size_t> bins;
  for (const Subject& subj : data.subjects) {
    const std::vector<double>& mean_curve = subj.group == 1 ? mean_group1 : mean_group2;
    const std::size_t m = subj.times.size();
    resid.resize(m);
    bins.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
      resid[j] = subj.values[j] - interp_curve(grid, mean_curve, subj.times[j]);
      bins[j] = bin_of(subj.times[j]);
      raw_sq.emplace_back(subj.times[j], resid[j] * resid[j]);
    }
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t l = 0; l < m; ++l) {
        if (j == l) continue;
        if (std::fabs(subj.times[j] - subj.times[l]) < diag_band) continue;
        pair_sum(bins[j], bins[l]) += resid[j] * resid[l];
        pair_count(bins[j], bins[l]) += 1.0;
      }
  }
  if (raw_sq.empty()) throw std::invalid_argument("estimate_covariance: no observations");

  // Smoothing with a product Epanechnikov kernel over the bins. The
  // local-linear variant fits value + two slopes by weighted least squares
  // at each target cell; the plane term removes the boundary bias a plain
  // weighted average has near the edges of the domain.
  const bool fit_plane = smoother == CovSmoother::kLocalLinear;
  const double h = grid[1] - grid[0];
  Matrix cov(r, r);
  for (std::size_t a = 0; a < r; ++a) {
    for (std::size_t b = a; b < r; ++b) {
      double est = 0.0;
      bool found = false;
      for (double bw = bandwidth; bw <= 16.0 * bandwidth; bw *= 2.0) {
        const int w = static_cast<int>(bw / h) + 1;
        double s00 = 0.0, s10 = 0.0, s01 = 0.0, s20 = 0.0, s11 = 0.0, s02 = 0.0;
        double t0 = 0.0, t1 = 0.0, t2 = 0.0;
        const std::size_t alo = a >= static_cast<std::size_t>(w) ? a - w : 0;
        const std::size_t ahi = std::min(a + static_cast<std::size_t>(w), r - 1);
        const std::size_t blo = b >= static_cast<std::size_t>(w) ? b - w : 0;
        const std::size_t bhi = std::min(b + static_cast<std::size_t>(w), r - 1);
        for (std::size_t p = alo; p <= ahi; ++p) {
          const double ka = epanechnikov((grid[a] - grid[p]) / bw);
          if (ka <= 0.0) continue;
          const double ds = grid[p] - grid[a];
          for (std::size_t q = blo; q <= bhi; ++q) {
            if (pair_count(p, q) == 0.0) continue;
            const double kb = epanechnikov((grid[b] - grid[q]) / bw);
            if (kb <= 0.0) continue;
            const double wt = ka * kb * pair_count(p, q);
            const double dt = grid[q] - grid[b];
            s00 += wt;
            s10 += wt * ds;
            s01 += wt * dt;
            s20 += wt * ds * ds;
            s11 += wt * ds * dt;
            s02 += wt * dt * dt;
            const double v = pair_sum(p, q) / pair_count(p, q);
            t0 += wt * v;
            t1 += wt * ds * v;
            t2 += wt * dt * v;
          }
        }
        if (s00 <= 0.0) continue;
        est = t0 / s00;  // kernel-weighted mean
        if (fit_plane) {
          const double det = s00 * (s20 * s02 - s11 * s11) - s10 * (s10 * s02 - s11 * s01) +
                             s01 * (s10 * s11 - s20 * s01);
          const double scale = s00 * s20 * s02 + 1e-300;
          // First component of the 3x3 weighted least squares solution;
          // degenerate windows keep the weighted mean.
          if (std::fabs(det) > 1e-8 * scale)
            est = (t0 * (s20 * s02 - s11 * s11) - t1 * (s10 * s02 - s11 * s01) +
                   t2 * (s10 * s11 - s20 * s01)) /
                  det;
        }
        found = true;
        break;
      }
      if (!found) throw NumericError("estimate_covariance: no pairs near grid cell");
      cov(a, b) = est;
      cov(b, a) = est;
    }
  }

  // Noise variance: raw second moments carry Sigma(t, t) + tau2, the
  // smoothed diagonal carries Sigma(t, t). The difference can go negative in
  // small samples; floor it at a sliver of the signal variance so downstream
  // shrinkage systems stay positive definite.
  std::vector<double> diag(r);
  double diag_mean = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    diag[i] = cov(i, i);
    diag_mean += diag[i];
  }
  diag_mean /= static_cast<double>(r);
  double tau2 = 0.0;
  for (const auto& [t, sq] : raw_sq) tau2 += sq - interp_curve(grid, diag, t);
  tau2 /= static_cast<double>(raw_sq.size());
  tau2 = std::max(tau2, 1e-6 * std::max(diag_mean, 1e-2));

  CovarianceEstimate out;
  out.cov = cov;
  out.tau2 = tau2;
  return out;
}

Matrix psd_project(const Matrix& a) {
  const SymEigen eig = sym_eigen(a);
  const std::size_t n = a.rows();
  Matrix out(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double lam = eig.values[k];
    if (lam <= 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const double vi = eig.vectors(i, k) * lam;
      for (std::size_t j = i; j < n; ++j) out(i, j) += vi * eig.vectors(j, k);
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) out(j, i) = out(i, j);
  return out;
}

FpcaFit fpca_fit(const SparseDataset& data, const FpcaOptions& options) {
  if (data.n1 < 2 || data.n2 < 2)
    throw std::invalid_argument("fpca_fit: need at least 2 subjects in each group");
  if (!(options.pve > 0.0 && options.pve <= 1.0))
    throw std::invalid_argument("fpca_fit: pve must be in (0, 1]");

  std::vector<std::pair<double, double>> pooled, g1, g2;
  for (const Subject& subj : data.subjects)
    for (std::size_t j = 0; j < subj.times.size(); ++j) {
      const auto pt = std::make_pair(subj.times[j], subj.values[j]);
      pooled.push_back(pt);
      (subj.group == 1 ? g1 : g2).push_back(pt);
    }
  if (pooled.size() < 40) throw std::invalid_argument("fpca_fit: too few observations");

  // Keep roughly >= 10 pooled observations per grid cell.
  const int r_max = static_cast<int>(pooled.size() / 10);
  const int r = std::clamp(options.grid_size, 8, std::max(8, r_max));
  const std::vector<double> grid = midpoint_grid(r);

  FpcaFit fit;
  fit.grid = grid;
  fit.mean_pooled = estimate_mean(pooled, grid, options.bw_mean);
  fit.mean_group1 = estimate_mean(g1, grid, options.bw_mean);
  fit.mean_group2 = estimate_mean(g2, grid, options.bw_mean);

  const CovarianceEstimate est = estimate_covariance(data, grid, fit.mean_group1,
                                                     fit.mean_group2, options.bw_cov,
                                                     options.diag_band, options.cov_smoother);
  fit.cov = psd_project(est.cov);
  fit.tau2 = est.tau2;

  fit.eig = eigen_from_grid_matrix(grid, fit.cov, options.pve, options.k_cap);

  const auto mu0 = [&](double t) { return interp_curve(grid, fit.mean_pooled, t); };
  fit.scores1 = Matrix(static_cast<std::size_t>(data.n1), static_cast<std::size_t>(fit.eig.K));
  fit.scores2 = Matrix(static_cast<std::size_t>(data.n2), static_cast<std::size_t>(fit.eig.K));
  std::size_t i1 = 0, i2 = 0;
  for (const Subject& subj : data.subjects) {
    const std::vector<double> z = blup_scores(subj.times, subj.values, fit.eig, fit.tau2, mu0);
    Matrix& dest = subj.group == 1 ? fit.scores1 : fit.scores2;
    std::size_t& row = subj.group == 1 ? i1 : i2;
    for (int k = 0; k < fit.eig.K; ++k)
      dest(row, static_cast<std::size_t>(k)) = z[static_cast<std::size_t>(k)];
    ++row;
  }

  const ScoreCov c1 = score_cov_empirical(fit.scores1);
  const ScoreCov c2 = score_cov_empirical(fit.scores2);
  fit.lambda1 = c1.cov;
  fit.lambda2 = c2.cov;
  fit.score_mean1 = c1.mean;
  fit.score_mean2 = c2.mean;
  return fit;
}

}  // namespace fdapower
