#pragma once

#include <vector>

#include "fdapower/matrix.hpp"

namespace fdapower {

// Two-sample Hotelling statistic on score vectors:
//   T = (n1 n2 / n) (zbar1 - zbar2)' pooled^{-1} (zbar1 - zbar2),
// pooled = { (n1-1) S1 + (n2-1) S2 } / (n - 2).
double hotelling_statistic(const Matrix& scores1, const Matrix& scores2);

enum class NullRule {
  kScaledF,  // exact small-sample rule: T ~ (n-2)K/(n-K-1) * F(K, n-K-1)
  kChiSq,    // asymptotic rule: T ~ chi-square(K)
};

struct TestResult {
  double statistic = 0.0;
  double threshold = 0.0;
  double p_value = 1.0;
  bool reject = false;
  int k = 0;
  int n1 = 0;
  int n2 = 0;
  NullRule rule = NullRule::kScaledF;
};

// Decision at level alpha for the statistic computed from the score rows.
TestResult test_decision(const Matrix& scores1, const Matrix& scores2, double alpha,
                         NullRule rule = NullRule::kScaledF);

}  // namespace fdapower
