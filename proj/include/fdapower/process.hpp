#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fdapower/matrix.hpp"
#include "fdapower/rng.hpp"

namespace fdapower {

// Group mean difference eta(t) on [0, 1]; group 1 has mean 0 and group 2
// has mean eta, so eta is also the group-2 offset from the pooled mean.
class MeanDiff {
 public:
  static MeanDiff zero();
  // eta(t) = sum_j coefficients[j] * t^j.
  static MeanDiff polynomial(std::vector<double> coefficients);
  // Piecewise-linear interpolation through (grid, values); flat outside.
  static MeanDiff piecewise_linear(std::vector<double> grid, std::vector<double> values);

  double operator()(double t) const;
  MeanDiff scaled(double s) const;
  bool is_zero() const { return kind_ == Kind::kZero; }

 private:
  enum class Kind { kZero, kPolynomial, kPiecewiseLinear };
  Kind kind_ = Kind::kZero;
  std::vector<double> coeffs_;
  std::vector<double> grid_;
  std::vector<double> values_;
  double scale_ = 1.0;
};

// Covariance kernel Sigma(s, t) of the latent process on [0, 1]^2.
class CovarianceKernel {
 public:
  // sigma2 * { rho + (1 - rho) 1[s == t] }: constant correlation with a
  // white-noise component that only shows up on the exact diagonal.
  static CovarianceKernel compound_symmetry(double sigma2, double rho);
  // sigma2 * base^|s - t|.
  static CovarianceKernel car1(double sigma2, double base);
  // Rank-2 nonstationary kernel: variance-1 score on sqrt(2) sin(2 pi t)
  // plus variance-0.5 score on sqrt(2) cos(2 pi t).
  static CovarianceKernel nonstationary_rank2();
  // Bilinear interpolation of a symmetric matrix tabulated on grid x grid.
  static CovarianceKernel from_grid(std::vector<double> grid, Matrix values);

  double operator()(double s, double t) const;
  // Kernel matrix at the given time points (diagonal uses Sigma(t, t)).
  Matrix matrix_at(const std::vector<double>& times) const;
  std::string describe() const;

 private:
  enum class Kind { kCompoundSymmetry, kCar1, kRank2, kGrid };
  Kind kind_ = Kind::kCar1;
  double sigma2_ = 1.0;
  double rho_ = 0.5;
  double base_ = 0.5;
  std::vector<double> grid_;
  Matrix values_;
};

// Per-subject observation design: how many points, where, and how much
// missingness thins them.
struct SamplingDesign {
  // Number of scheduled points: either fixed `m`, or uniform over
  // {count_min, ..., count_max} when count_min < count_max.
  int count_min = 8;
  int count_max = 8;
  // Scheduled visit times; empty means iid Uniform(0, 1) redrawn per subject.
  std::vector<double> schedule;
  // Each scheduled point is dropped independently with this probability.
  double missing = 0.0;
  // Thinning below this many points is redrawn.
  int min_observations = 1;

  void validate() const;
  // Draw one subject's (sorted) observation times.
  std::vector<double> draw_times(RngStream& rng) const;
};

// Keep each point independently with probability 1 - p; redraw the thinning
// until at least min_keep points survive.
std::vector<double> apply_missingness(RngStream& rng, const std::vector<double>& schedule,
                                      double p, int min_keep = 1);

struct Subject {
  int id = 0;
  int group = 1;  // 1 or 2
  std::vector<double> times;
  std::vector<double> values;
};

struct SparseDataset {
  std::vector<Subject> subjects;
  int n1 = 0;
  int n2 = 0;
};

// Generate n1 + n2 subjects: group 1 from mean 0, group 2 from mean eta,
// latent paths from the kernel, iid N(0, tau2) measurement noise. Subject i
// (0-based over the concatenated groups) uses rng.substream(i), so the
// dataset is reproducible subject-by-subject.
SparseDataset generate_dataset(const RngStream& rng, int n1, int n2, const MeanDiff& eta,
                               const CovarianceKernel& kernel, const SamplingDesign& design,
                               double tau2);

}  // namespace fdapower
