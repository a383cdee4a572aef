#pragma once

#include <functional>
#include <vector>

#include "fdapower/eigengrid.hpp"
#include "fdapower/matrix.hpp"
#include "fdapower/process.hpp"
#include "fdapower/rng.hpp"

namespace fdapower {

// Best linear unbiased predictor of the first K scores of one subject:
//   zeta = diag(lambda) Psi' G^{-1} (y - mu0(t)),
// where G = Psi diag(lambda) Psi' + tau2 I is built from the same truncated
// eigensystem used for the projection. Keeping G and Psi consistent is what
// makes the predictor stable: a G assembled from a different representation
// of the kernel amplifies any basis mismatch by 1/tau2. The solve goes
// through the equivalent K x K system, which stays well-posed even at
// tau2 = 0 as long as the subject has K linearly independent basis rows.
std::vector<double> blup_scores(const std::vector<double>& times,
                                const std::vector<double>& values, const EigenSystem& eig,
                                double tau2, const std::function<double(double)>& mu0);

// Covariance of the shrinkage scores over the observation-design law:
//   E_T[diag(lambda) Psi' G^{-1} Psi diag(lambda)]
//     + Cov_T[diag(lambda) Psi' G^{-1} offset(T)],
// estimated from S Monte Carlo design draws (the count N and the times are
// both drawn). `offset` is the group mean minus the pooled mean; null means
// zero offset, which kills the second term exactly.
Matrix score_cov_mc(RngStream& rng, const EigenSystem& eig, const SamplingDesign& design,
                    const MeanDiff* offset, double tau2, int s);

struct ScoreCov {
  std::vector<double> mean;
  Matrix cov;
};

// Sample mean and covariance (divisor n - 1) of score rows.
ScoreCov score_cov_empirical(const Matrix& scores);

}  // namespace fdapower
