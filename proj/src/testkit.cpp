#include "fdapower/testkit.hpp"

#include <stdexcept>

#include "fdapower/errors.hpp"
#include "fdapower/linalg.hpp"
#include "fdapower/probdist.hpp"
#include "fdapower/shrinkage.hpp"

namespace fdapower {

double hotelling_statistic(const Matrix& scores1, const Matrix& scores2) {
  if (scores1.cols() != scores2.cols())
    throw std::invalid_argument("hotelling_statistic: score dimensions differ");
  const std::size_t k = scores1.cols();
  if (k == 0) throw std::invalid_argument("hotelling_statistic: no score components");
  const double n1 = static_cast<double>(scores1.rows());
  const double n2 = static_cast<double>(scores2.rows());
  if (scores1.rows() < 2 || scores2.rows() < 2)
    throw std::invalid_argument("hotelling_statistic: need at least 2 subjects per group");

  const ScoreCov g1 = score_cov_empirical(scores1);
  const ScoreCov g2 = score_cov_empirical(scores2);

  Matrix pooled(k, k);
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t q = 0; q < k; ++q)
      pooled(p, q) = ((n1 - 1.0) * g1.cov(p, q) + (n2 - 1.0) * g2.cov(p, q)) / (n1 + n2 - 2.0);

  std::vector<double> diff(k);
  for (std::size_t j = 0; j < k; ++j) diff[j] = g1.mean[j] - g2.mean[j];

  std::vector<double> sol;
  try {
    sol = spd_solve(pooled, diff);
  } catch (const NotSpdError&) {
    throw NotSpdError("hotelling_statistic: pooled score covariance is singular");
  }
  double quad = 0.0;
  for (std::size_t j = 0; j < k; ++j) quad += diff[j] * sol[j];
  return (n1 * n2 / (n1 + n2)) * quad;
}

TestResult test_decision(const Matrix& scores1, const Matrix& scores2, double alpha,
                         NullRule rule) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("test_decision: alpha must be in (0, 1)");
  TestResult res;
  res.k = static_cast<int>(scores1.cols());
  res.n1 = static_cast<int>(scores1.rows());
  res.n2 = static_cast<int>(scores2.rows());
  res.rule = rule;
  const int n = res.n1 + res.n2;
  res.statistic = hotelling_statistic(scores1, scores2);

  if (rule == NullRule::kScaledF) {
    if (n - res.k - 1 < 1)
      throw std::invalid_argument("test_decision: need n1 + n2 > K + 1 for the F rule");
    const double d2 = static_cast<double>(n - res.k - 1);
    res.threshold = (static_cast<double>(n - 2) * res.k / d2) *
                    f_quantile(1.0 - alpha, static_cast<double>(res.k), d2);
    res.p_value = scaled_f_pvalue(res.statistic, res.k, n);
  } else {
    res.threshold = chisq_quantile(1.0 - alpha, static_cast<double>(res.k));
    res.p_value = 1.0 - chisq_cdf(res.statistic, static_cast<double>(res.k));
  }
  res.reject = res.statistic > res.threshold;
  return res;
}

}  // namespace fdapower
