#pragma once

namespace fdapower {

// Regularized incomplete beta I_x(a, b).
double reg_inc_beta(double a, double b, double x);

// Regularized lower incomplete gamma P(a, x).
double reg_lower_gamma(double a, double x);

double normal_cdf(double x);
// Inverse standard normal CDF (Wichura's AS 241, double precision).
double normal_quantile(double p);

double f_cdf(double x, double d1, double d2);
// p-th quantile of the F(d1, d2) distribution; CDF(quantile) = p to ~1e-12.
double f_quantile(double p, double d1, double d2);

// Chi-square with real-valued degrees of freedom.
double chisq_cdf(double x, double df);
double chisq_quantile(double p, double df);

// Upper tail probability of the two-sample statistic T under its null
// scaled-F law: P{ F(K, n-K-1) > T (n-K-1) / ((n-2) K) }.
double scaled_f_pvalue(double t, int k, int n);

}  // namespace fdapower
