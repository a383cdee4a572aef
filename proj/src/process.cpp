#include "fdapower/process.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fdapower/errors.hpp"

namespace fdapower {

MeanDiff MeanDiff::zero() { return MeanDiff(); }

MeanDiff MeanDiff::polynomial(std::vector<double> coefficients) {
  MeanDiff m;
  m.kind_ = Kind::kPolynomial;
  m.coeffs_ = std::move(coefficients);
  if (m.coeffs_.empty()) m.kind_ = Kind::kZero;
  return m;
}

MeanDiff MeanDiff::piecewise_linear(std::vector<double> grid, std::vector<double> values) {
  if (grid.size() != values.size() || grid.size() < 2)
    throw std::invalid_argument("MeanDiff: grid and values must match with >= 2 points");
  if (!std::is_sorted(grid.begin(), grid.end()))
    throw std::invalid_argument("MeanDiff: grid must be sorted");
  MeanDiff m;
  m.kind_ = Kind::kPiecewiseLinear;
  m.grid_ = std::move(grid);
  m.values_ = std::move(values);
  return m;
}

double MeanDiff::operator()(double t) const {
  switch (kind_) {
    case Kind::kZero:
      return 0.0;
    case Kind::kPolynomial: {
      double acc = 0.0;
      for (std::size_t j = coeffs_.size(); j-- > 0;) acc = acc * t + coeffs_[j];
      return scale_ * acc;
    }
    case Kind::kPiecewiseLinear: {
      if (t <= grid_.front()) return scale_ * values_.front();
      if (t >= grid_.back()) return scale_ * values_.back();
      const auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
      const std::size_t hi = static_cast<std::size_t>(it - grid_.begin());
      const double w = (t - grid_[hi - 1]) / (grid_[hi] - grid_[hi - 1]);
      return scale_ * ((1.0 - w) * values_[hi - 1] + w * values_[hi]);
    }
  }
  return 0.0;
}

MeanDiff MeanDiff::scaled(double s) const {
  MeanDiff m = *this;
  m.scale_ *= s;
  if (s == 0.0) m.kind_ = Kind::kZero;
  return m;
}

CovarianceKernel CovarianceKernel::compound_symmetry(double sigma2, double rho) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("compound_symmetry: sigma2 must be positive");
  if (!(rho >= 0.0 && rho < 1.0))
    throw std::invalid_argument("compound_symmetry: rho must be in [0, 1)");
  CovarianceKernel k;
  k.kind_ = Kind::kCompoundSymmetry;
  k.sigma2_ = sigma2;
  k.rho_ = rho;
  return k;
}

CovarianceKernel CovarianceKernel::car1(double sigma2, double base) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("car1: sigma2 must be positive");
  if (!(base > 0.0 && base < 1.0)) throw std::invalid_argument("car1: base must be in (0, 1)");
  CovarianceKernel k;
  k.kind_ = Kind::kCar1;
  k.sigma2_ = sigma2;
  k.base_ = base;
  return k;
}

CovarianceKernel CovarianceKernel::nonstationary_rank2() {
  CovarianceKernel k;
  k.kind_ = Kind::kRank2;
  return k;
}

CovarianceKernel CovarianceKernel::from_grid(std::vector<double> grid, Matrix values) {
  if (grid.size() < 2) throw std::invalid_argument("from_grid: need at least 2 grid points");
  if (values.rows() != grid.size() || values.cols() != grid.size())
    throw std::invalid_argument("from_grid: matrix shape must match grid");
  if (!std::is_sorted(grid.begin(), grid.end()))
    throw std::invalid_argument("from_grid: grid must be sorted");
  if (values.asymmetry() > 1e-8 * std::max(values.max_abs(), 1e-300))
    throw std::invalid_argument("from_grid: matrix must be symmetric");
  CovarianceKernel k;
  k.kind_ = Kind::kGrid;
  k.grid_ = std::move(grid);
  k.values_ = std::move(values);
  return k;
}

double CovarianceKernel::operator()(double s, double t) const {
  if (!(s >= 0.0 && s <= 1.0 && t >= 0.0 && t <= 1.0))
    throw std::invalid_argument("kernel: time points must lie in [0, 1]");
  switch (kind_) {
    case Kind::kCompoundSymmetry:
      return sigma2_ * (rho_ + (s == t ? 1.0 - rho_ : 0.0));
    case Kind::kCar1:
      return sigma2_ * std::pow(base_, std::fabs(s - t));
    case Kind::kRank2: {
      const double two_pi = 2.0 * M_PI;
      return 2.0 * std::sin(two_pi * s) * std::sin(two_pi * t) +
             std::cos(two_pi * s) * std::cos(two_pi * t);
    }
    case Kind::kGrid: {
      auto locate = [this](double x, std::size_t& lo, double& w) {
        if (x <= grid_.front()) {
          lo = 0;
          w = 0.0;
          return;
        }
        if (x >= grid_.back()) {
          lo = grid_.size() - 2;
          w = 1.0;
          return;
        }
        const auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
        lo = static_cast<std::size_t>(it - grid_.begin()) - 1;
        w = (x - grid_[lo]) / (grid_[lo + 1] - grid_[lo]);
      };
      std::size_t i, j;
      double u, v;
      locate(s, i, u);
      locate(t, j, v);
      return (1.0 - u) * (1.0 - v) * values_(i, j) + u * (1.0 - v) * values_(i + 1, j) +
             (1.0 - u) * v * values_(i, j + 1) + u * v * values_(i + 1, j + 1);
    }
  }
  return 0.0;
}

Matrix CovarianceKernel::matrix_at(const std::vector<double>& times) const {
  const std::size_t m = times.size();
  Matrix out(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i; j < m; ++j) {
      const double v = (*this)(times[i], times[j]);
      out(i, j) = v;
      out(j, i) = v;
    }
  return out;
}

std::string CovarianceKernel::describe() const {
  switch (kind_) {
    case Kind::kCompoundSymmetry:
      return "compound-symmetry";
    case Kind::kCar1:
      return "car1";
    case Kind::kRank2:
      return "nonstationary-rank2";
    case Kind::kGrid:
      return "grid";
  }
  return "unknown";
}

void SamplingDesign::validate() const {
  if (schedule.empty()) {
    if (count_min < 1 || count_max < count_min)
      throw std::invalid_argument("SamplingDesign: need 1 <= count_min <= count_max");
  } else {
    if (!std::is_sorted(schedule.begin(), schedule.end()))
      throw std::invalid_argument("SamplingDesign: schedule must be sorted");
    for (double t : schedule)
      if (!(t >= 0.0 && t <= 1.0))
        throw std::invalid_argument("SamplingDesign: schedule times must lie in [0, 1]");
  }
  if (!(missing >= 0.0 && missing < 1.0))
    throw std::invalid_argument("SamplingDesign: missing probability must be in [0, 1)");
  if (min_observations < 1)
    throw std::invalid_argument("SamplingDesign: min_observations must be >= 1");
}

std::vector<double> SamplingDesign::draw_times(RngStream& rng) const {
  validate();
  std::vector<double> pts;
  if (!schedule.empty()) {
    pts = schedule;
  } else {
    int m = count_min;
    if (count_max > count_min)
      m = count_min + static_cast<int>(rng.next_u64() %
                                       static_cast<std::uint64_t>(count_max - count_min + 1));
    pts.resize(m);
    for (double& t : pts) t = rng.uniform();
    std::sort(pts.begin(), pts.end());
  }
  if (missing > 0.0) pts = apply_missingness(rng, pts, missing, min_observations);
  return pts;
}

std::vector<double> apply_missingness(RngStream& rng, const std::vector<double>& schedule,
                                      double p, int min_keep) {
  if (!(p >= 0.0 && p < 1.0))
    throw std::invalid_argument("apply_missingness: p must be in [0, 1)");
  if (min_keep < 1) throw std::invalid_argument("apply_missingness: min_keep must be >= 1");
  if (p == 0.0) return schedule;
  if (static_cast<int>(schedule.size()) <= min_keep) return schedule;
  std::vector<double> kept;
  for (;;) {
    kept.clear();
    for (double t : schedule)
      if (rng.uniform() >= p) kept.push_back(t);
    if (static_cast<int>(kept.size()) >= min_keep) return kept;
  }
}

SparseDataset generate_dataset(const RngStream& rng, int n1, int n2, const MeanDiff& eta,
                               const CovarianceKernel& kernel, const SamplingDesign& design,
                               double tau2) {
  if (n1 < 1 || n2 < 1) throw std::invalid_argument("generate_dataset: need n1, n2 >= 1");
  if (!(tau2 >= 0.0)) throw std::invalid_argument("generate_dataset: tau2 must be >= 0");
  design.validate();

  SparseDataset data;
  data.n1 = n1;
  data.n2 = n2;
  data.subjects.resize(static_cast<std::size_t>(n1 + n2));
  const double noise_sd = std::sqrt(tau2);
  for (int i = 0; i < n1 + n2; ++i) {
    RngStream sub = rng.substream(static_cast<std::uint64_t>(i));
    Subject& subj = data.subjects[static_cast<std::size_t>(i)];
    subj.id = i + 1;
    subj.group = i < n1 ? 1 : 2;
    subj.times = design.draw_times(sub);

    std::vector<double> mean(subj.times.size(), 0.0);
    if (subj.group == 2 && !eta.is_zero())
      for (std::size_t j = 0; j < subj.times.size(); ++j) mean[j] = eta(subj.times[j]);
    subj.values = sub.mvn(mean, kernel.matrix_at(subj.times));
    if (noise_sd > 0.0)
      for (double& y : subj.values) y += noise_sd * sub.normal();
  }
  return data;
}

}  // namespace fdapower
