#pragma once

#include <vector>

#include "fdapower/matrix.hpp"

namespace fdapower {

struct SymEigen {
  std::vector<double> values;  // descending
  Matrix vectors;              // column k pairs with values[k]
};

// Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
// Eigenvalues are returned in descending order; each eigenvector is sign-fixed
// so its largest-magnitude entry is positive. Throws std::invalid_argument if
// the input is not (numerically) symmetric and NumericError on non-convergence.
SymEigen sym_eigen(const Matrix& a);

// Lower Cholesky factor of a symmetric positive definite matrix.
// Throws NotSpdError when a pivot fails.
Matrix chol_spd(const Matrix& a);

// Solve A x = b for SPD A via Cholesky.
std::vector<double> spd_solve(const Matrix& a, const std::vector<double>& b);
Matrix spd_solve(const Matrix& a, const Matrix& b);

// Symmetric inverse square root A^{-1/2} = U diag(1/sqrt(lambda)) U'.
Matrix inv_sqrt_spd(const Matrix& a);

double trace(const Matrix& a);

// Solve L y = b then L' x = y for lower-triangular L.
std::vector<double> chol_solve(const Matrix& chol_lower, const std::vector<double>& b);

}  // namespace fdapower
