#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fdapower/fpca.hpp"
#include "fdapower/pass.hpp"
#include "fdapower/process.hpp"
#include "fdapower/rng.hpp"

namespace fdapower {

enum class HarnessMode {
  kKnownEigen,     // score subjects with the true kernel and eigensystem
  kEmpiricalFpca,  // re-estimate everything from each replicate
};

struct HarnessOptions {
  HarnessMode mode = HarnessMode::kEmpiricalFpca;
  int replications = 500;
  double alpha = 0.05;
  double pve = 0.9;
  int grid_size = 100;      // known-eigen eigensystem resolution
  int fit_grid_size = 51;   // per-replicate estimation grid
  double bw_mean = 0.1;     // per-replicate smoothing controls
  double bw_cov = 0.15;
  double diag_band = 0.05;
  CovSmoother cov_smoother = CovSmoother::kNadarayaWatson;
};

struct EmpiricalCell {
  int replications = 0;
  int successes = 0;
  int failures = 0;  // replicates lost to numerical failure
  int rejections = 0;
  double rate = 0.0;  // rejections / successes
  double ci_lo = 0.0;  // Wilson 95%
  double ci_hi = 0.0;
};

// Rejection rate over `options.replications` independent datasets.
// Replicate r is computed entirely from rng.substream(r), so results do not
// depend on evaluation order or on how work is divided among workers.
EmpiricalCell empirical_power(const RngStream& rng, const MeanDiff& eta,
                              const CovarianceKernel& kernel, const SamplingDesign& design,
                              double tau2, int n1, int n2, const HarnessOptions& options,
                              const EigenSystem* known_eig = nullptr);

struct SweepRow {
  double missing = 0.0;
  PowerReport report;
};

// Theoretical power of the same request across missingness levels (the
// design is thinned; everything else is re-estimated per level).
std::vector<SweepRow> missing_sweep(const PowerRequest& request,
                                    const std::vector<double>& missing_levels);

struct ComparisonCell {
  double eta = 0.0;
  int n_total = 0;
  double missing = 0.0;
  int k = 0;
  std::optional<double> theoretical;
  std::optional<EmpiricalCell> empirical;
  bool flagged = false;
};

// Flag cells whose theoretical power misses the empirical CI by > 0.05.
void flag_comparisons(std::vector<ComparisonCell>& cells);

}  // namespace fdapower
