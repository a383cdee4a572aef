#pragma once

#include <vector>

#include "fdapower/matrix.hpp"
#include "fdapower/process.hpp"

namespace fdapower {

// Eigenvalues/eigenfunctions of a covariance kernel discretized on the
// midpoint grid t_r = (r - 1/2) / R. Matrix eigenvalues scaled by the cell
// width h = 1/R approximate the integral-operator eigenvalues; eigenvectors
// divided by sqrt(h) approximate the L2-orthonormal eigenfunctions.
struct EigenSystem {
  std::vector<double> grid;
  double h = 0.0;
  std::vector<double> values;  // descending, positive
  Matrix functions;            // R x K, column k tabulates psi_k on the grid
  int K = 0;
  double pve_achieved = 0.0;
  bool k_capped = false;  // PVE wanted more than the component cap

  // psi_k(t) by linear interpolation between grid midpoints, constant
  // beyond the first/last midpoint.
  double eval(int k, double t) const;
  // Row of all K eigenfunctions at t.
  std::vector<double> eval_all(double t) const;
};

std::vector<double> midpoint_grid(int r);

// Decompose a kernel on an R-point midpoint grid, keeping the smallest K
// whose proportion of variance explained (over all positive eigenvalues)
// reaches `pve`. Eigenvalues below 1e-10 of the leading one are discarded;
// K never exceeds k_cap.
EigenSystem eigen_from_kernel(const CovarianceKernel& kernel, int r, double pve,
                              int k_cap = 20);

// Same truncation rule applied to a kernel already tabulated on `grid`
// (grid spacing must be uniform).
EigenSystem eigen_from_grid_matrix(const std::vector<double>& grid, const Matrix& values,
                                   double pve, int k_cap = 20);

// Midpoint-rule projections delta_k = h * sum_r eta(t_r) psi_k(t_r).
std::vector<double> project_meandiff(const EigenSystem& eig, const MeanDiff& eta);

}  // namespace fdapower
