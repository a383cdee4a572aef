#include "fdapower/eigengrid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fdapower/errors.hpp"
#include "fdapower/linalg.hpp"

namespace fdapower {

namespace {

EigenSystem truncate_eigensystem(std::vector<double> grid, const SymEigen& eig, double pve,
                                 int k_cap) {
  const std::size_t r = grid.size();
  const double h = grid[1] - grid[0];

  EigenSystem out;
  out.grid = std::move(grid);
  out.h = h;

  std::vector<double> lambdas;
  lambdas.reserve(r);
  double total = 0.0;
  for (double v : eig.values) {
    const double lam = h * v;
    if (lam > 0.0) total += lam;
  }
  if (!(total > 0.0)) throw NumericError("eigen_from_kernel: kernel has no positive eigenvalues");
  const double floor = 1e-10 * h * std::max(eig.values.front(), 0.0);

  double cum = 0.0;
  int k = 0;
  for (std::size_t idx = 0; idx < r; ++idx) {
    const double lam = h * eig.values[idx];
    if (lam <= floor) break;
    lambdas.push_back(lam);
    cum += lam;
    ++k;
    if (cum / total >= pve) break;
    if (k == k_cap) {
      out.k_capped = cum / total < pve;
      break;
    }
  }
  out.K = k;
  out.values = std::move(lambdas);
  out.pve_achieved = cum / total;
  out.functions = Matrix(r, static_cast<std::size_t>(k));
  const double inv_sqrt_h = 1.0 / std::sqrt(h);
  for (int j = 0; j < k; ++j)
    for (std::size_t i = 0; i < r; ++i)
      out.functions(i, static_cast<std::size_t>(j)) =
          eig.vectors(i, static_cast<std::size_t>(j)) * inv_sqrt_h;
  return out;
}

}  // namespace

double EigenSystem::eval(int k, double t) const {
  if (k < 0 || k >= K) throw std::invalid_argument("EigenSystem::eval: component out of range");
  const std::size_t col = static_cast<std::size_t>(k);
  if (t <= grid.front()) return functions(0, col);
  if (t >= grid.back()) return functions(grid.size() - 1, col);
  const auto it = std::upper_bound(grid.begin(), grid.end(), t);
  const std::size_t hi = static_cast<std::size_t>(it - grid.begin());
  const double w = (t - grid[hi - 1]) / (grid[hi] - grid[hi - 1]);
  return (1.0 - w) * functions(hi - 1, col) + w * functions(hi, col);
}

std::vector<double> EigenSystem::eval_all(double t) const {
  std::vector<double> row(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) row[static_cast<std::size_t>(k)] = eval(k, t);
  return row;
}

std::vector<double> midpoint_grid(int r) {
  if (r < 2) throw std::invalid_argument("midpoint_grid: need R >= 2");
  std::vector<double> g(static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i) g[static_cast<std::size_t>(i)] = (i + 0.5) / r;
  return g;
}

EigenSystem eigen_from_kernel(const CovarianceKernel& kernel, int r, double pve, int k_cap) {
  if (r < 2 || r > 512) throw std::invalid_argument("eigen_from_kernel: R must be in [2, 512]");
  if (!(pve > 0.0 && pve <= 1.0))
    throw std::invalid_argument("eigen_from_kernel: pve must be in (0, 1]");
  if (k_cap < 1) throw std::invalid_argument("eigen_from_kernel: k_cap must be >= 1");
  std::vector<double> grid = midpoint_grid(r);
  return truncate_eigensystem(grid, sym_eigen(kernel.matrix_at(grid)), pve, k_cap);
}

EigenSystem eigen_from_grid_matrix(const std::vector<double>& grid, const Matrix& values,
                                   double pve, int k_cap) {
  if (grid.size() < 2) throw std::invalid_argument("eigen_from_grid_matrix: need >= 2 points");
  if (!(pve > 0.0 && pve <= 1.0))
    throw std::invalid_argument("eigen_from_grid_matrix: pve must be in (0, 1]");
  const double h = grid[1] - grid[0];
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (std::fabs(grid[i] - grid[i - 1] - h) > 1e-9 * std::max(h, 1e-12))
      throw std::invalid_argument("eigen_from_grid_matrix: grid spacing must be uniform");
  return truncate_eigensystem(grid, sym_eigen(values), pve, k_cap);
}

std::vector<double> project_meandiff(const EigenSystem& eig, const MeanDiff& eta) {
  std::vector<double> delta(static_cast<std::size_t>(eig.K), 0.0);
  if (eta.is_zero()) return delta;
  for (std::size_t r = 0; r < eig.grid.size(); ++r) {
    const double e = eta(eig.grid[r]);
    if (e == 0.0) continue;
    for (int k = 0; k < eig.K; ++k)
      delta[static_cast<std::size_t>(k)] += e * eig.functions(r, static_cast<std::size_t>(k));
  }
  for (double& d : delta) d *= eig.h;
  return delta;
}

}  // namespace fdapower
