#include "fdapower/harness.hpp"

#include <cmath>
#include <stdexcept>

#include "fdapower/errors.hpp"
#include "fdapower/shrinkage.hpp"
#include "fdapower/testkit.hpp"

namespace fdapower {

namespace {

void wilson_interval(EmpiricalCell& cell) {
  if (cell.successes == 0) return;
  const double z = 1.959963984540054;
  const double n = cell.successes;
  const double p = static_cast<double>(cell.rejections) / n;
  cell.rate = p;
  const double denom = 1.0 + z * z / n;
  const double center = (p + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
  cell.ci_lo = std::max(center - half, 0.0);
  cell.ci_hi = std::min(center + half, 1.0);
}

}  // namespace

EmpiricalCell empirical_power(const RngStream& rng, const MeanDiff& eta,
                              const CovarianceKernel& kernel, const SamplingDesign& design,
                              double tau2, int n1, int n2, const HarnessOptions& options,
                              const EigenSystem* known_eig) {
  if (options.replications < 1)
    throw std::invalid_argument("empirical_power: need at least 1 replication");
  if (!(options.alpha > 0.0 && options.alpha < 1.0))
    throw std::invalid_argument("empirical_power: alpha must be in (0, 1)");

  EigenSystem local_eig;
  const EigenSystem* eig = known_eig;
  if (options.mode == HarnessMode::kKnownEigen && eig == nullptr) {
    local_eig = eigen_from_kernel(kernel, options.grid_size, options.pve);
    eig = &local_eig;
  }

  EmpiricalCell cell;
  cell.replications = options.replications;
  for (int rep = 0; rep < options.replications; ++rep) {
    const RngStream rep_rng = rng.substream(static_cast<std::uint64_t>(rep));
    try {
      const SparseDataset data =
          generate_dataset(rep_rng, n1, n2, eta, kernel, design, tau2);
      TestResult res;
      if (options.mode == HarnessMode::kKnownEigen) {
        Matrix scores1(static_cast<std::size_t>(n1), static_cast<std::size_t>(eig->K));
        Matrix scores2(static_cast<std::size_t>(n2), static_cast<std::size_t>(eig->K));
        std::size_t i1 = 0, i2 = 0;
        for (const Subject& subj : data.subjects) {
          const std::vector<double> z =
              blup_scores(subj.times, subj.values, *eig, tau2, nullptr);
          Matrix& dest = subj.group == 1 ? scores1 : scores2;
          std::size_t& row = subj.group == 1 ? i1 : i2;
          for (int k = 0; k < eig->K; ++k)
            dest(row, static_cast<std::size_t>(k)) = z[static_cast<std::size_t>(k)];
          ++row;
        }
        res = test_decision(scores1, scores2, options.alpha);
      } else {
        FpcaOptions fopt;
        fopt.grid_size = options.fit_grid_size;
        fopt.pve = options.pve;
        fopt.bw_mean = options.bw_mean;
        fopt.bw_cov = options.bw_cov;
        fopt.diag_band = options.diag_band;
        fopt.cov_smoother = options.cov_smoother;
        const FpcaFit fit = fpca_fit(data, fopt);
        res = test_decision(fit.scores1, fit.scores2, options.alpha);
      }
      ++cell.successes;
      if (res.reject) ++cell.rejections;
    } catch (const NumericError&) {
      ++cell.failures;
    }
  }
  wilson_interval(cell);
  return cell;
}

std::vector<SweepRow> missing_sweep(const PowerRequest& request,
                                    const std::vector<double>& missing_levels) {
  if (missing_levels.empty()) throw std::invalid_argument("missing_sweep: no levels given");
  std::vector<SweepRow> rows;
  rows.reserve(missing_levels.size());
  for (double p : missing_levels) {
    PowerRequest level = request;
    level.design.missing = p;
    SweepRow row;
    row.missing = p;
    row.report = algorithm1_power(level);
    rows.push_back(std::move(row));
  }
  return rows;
}

void flag_comparisons(std::vector<ComparisonCell>& cells) {
  for (ComparisonCell& cell : cells) {
    cell.flagged = false;
    if (!cell.theoretical.has_value() || !cell.empirical.has_value()) continue;
    const EmpiricalCell& emp = cell.empirical.value();
    if (emp.successes == 0) {
      cell.flagged = true;
      continue;
    }
    const double margin = 0.5 * (emp.ci_hi - emp.ci_lo) + 0.05;
    cell.flagged = std::fabs(cell.theoretical.value() - emp.rate) > margin;
  }
}

}  // namespace fdapower
