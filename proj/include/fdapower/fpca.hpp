#pragma once

#include <utility>
#include <vector>

#include "fdapower/eigengrid.hpp"
#include "fdapower/matrix.hpp"
#include "fdapower/process.hpp"

namespace fdapower {

enum class CovSmoother {
  kNadarayaWatson,  // kernel-weighted average of the binned cross-products
  kLocalLinear,     // adds a fitted plane, removing boundary bias
};

struct FpcaOptions {
  int grid_size = 51;
  double pve = 0.95;
  double bw_mean = 0.1;
  double bw_cov = 0.15;
  // Raw product pairs closer than this to the diagonal are excluded from
  // covariance smoothing (they carry the measurement-error nugget).
  double diag_band = 0.05;
  int k_cap = 20;
  CovSmoother cov_smoother = CovSmoother::kNadarayaWatson;
};

struct FpcaFit {
  std::vector<double> grid;
  std::vector<double> mean_pooled;
  std::vector<double> mean_group1;
  std::vector<double> mean_group2;
  Matrix cov;         // smoothed, PSD-repaired covariance on grid x grid
  double tau2 = 0.0;  // measurement-error variance estimate, clipped at 0
  EigenSystem eig;
  Matrix scores1;  // n1 x K shrinkage scores, centered at the pooled mean
  Matrix scores2;
  Matrix lambda1;  // per-group empirical score covariances
  Matrix lambda2;
  std::vector<double> score_mean1;
  std::vector<double> score_mean2;
};

// Linear interpolation of a curve tabulated on a sorted grid (constant
// beyond the ends).
double interp_curve(const std::vector<double>& grid, const std::vector<double>& values, double t);

// Local-linear smoother with Epanechnikov weights of pooled (time, value)
// observations, evaluated on `grid`. Falls back to a locally widened
// bandwidth, then to a kernel-weighted mean, where the design is degenerate.
std::vector<double> estimate_mean(std::vector<std::pair<double, double>> obs,
                                  const std::vector<double>& grid, double bandwidth);

struct CovarianceEstimate {
  Matrix cov;   // smoothed surface on grid x grid (not yet PSD-repaired)
  double tau2;  // mean of raw residual second moments minus smoothed diagonal
};

// 2-D kernel smoothing of raw residual cross-products on a grid, with
// pairs inside the diagonal band excluded. Residuals are taken against the
// supplied per-group mean curves.
CovarianceEstimate estimate_covariance(const SparseDataset& data,
                                       const std::vector<double>& grid,
                                       const std::vector<double>& mean_group1,
                                       const std::vector<double>& mean_group2,
                                       double bandwidth, double diag_band,
                                       CovSmoother smoother = CovSmoother::kNadarayaWatson);

// Clip negative eigenvalues of a symmetric matrix to zero.
Matrix psd_project(const Matrix& a);

// Full sparse functional PCA: pooled/group means, smoothed covariance,
// noise variance, eigensystem by PVE, shrinkage scores of every subject
// against the pooled mean, and per-group empirical score covariances.
// The working grid shrinks below options.grid_size when the pooled
// observation count is too small to support it (10 observations per cell).
FpcaFit fpca_fit(const SparseDataset& data, const FpcaOptions& options);

}  // namespace fdapower
