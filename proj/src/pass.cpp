#include "fdapower/pass.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fdapower/errors.hpp"
#include "fdapower/fpca.hpp"
#include "fdapower/linalg.hpp"
#include "fdapower/probdist.hpp"
#include "fdapower/shrinkage.hpp"

namespace fdapower {

namespace {

struct OmegaParts {
  std::vector<double> omega;  // eigenvalues of Ld^{-1/2} Lambda1 Ld^{-1/2}
  std::vector<double> proj;   // u_k' Ld^{-1/2} delta
};

OmegaParts decompose_omega(const std::vector<double>& delta, const Matrix& lambda1,
                           const Matrix& lambda2, double kappa) {
  const std::size_t k = delta.size();
  if (k == 0) throw std::invalid_argument("build_nonnull: empty projection vector");
  if (lambda1.rows() != k || lambda1.cols() != k || lambda2.rows() != k || lambda2.cols() != k)
    throw std::invalid_argument("build_nonnull: covariance dimensions must match delta");
  if (!(kappa > 0.0)) throw std::invalid_argument("build_nonnull: kappa must be positive");

  Matrix ld(k, k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) ld(i, j) = lambda1(i, j) + kappa * lambda2(i, j);
  const Matrix root = inv_sqrt_spd(ld);

  Matrix omega = root * lambda1 * root;
  omega.symmetrize();
  const SymEigen eig = sym_eigen(omega);

  OmegaParts parts;
  parts.omega.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    double w = eig.values[i];
    if (w < -1e-8 || w > 1.0 + 1e-8)
      throw NumericError("build_nonnull: Omega eigenvalue outside [0, 1]");
    parts.omega[i] = std::clamp(w, 0.0, 1.0);
  }

  const std::vector<double> scaled = root.multiply(delta);
  parts.proj.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j) acc += eig.vectors(j, i) * scaled[j];
    parts.proj[i] = acc;
  }
  return parts;
}

}  // namespace

NonNullSpec build_nonnull(const std::vector<double>& delta, const Matrix& lambda1,
                          const Matrix& lambda2, double kappa, int n2) {
  if (n2 < 2) throw std::invalid_argument("build_nonnull: need n2 >= 2");
  const int n1 = static_cast<int>(std::ceil(kappa * n2 - 1e-9));
  if (n1 < 2) throw std::invalid_argument("build_nonnull: need kappa n2 >= 2");

  NonNullSpec spec;
  spec.k = static_cast<int>(delta.size());
  spec.n1 = n1;
  spec.n2 = n2;
  spec.kappa = static_cast<double>(n1) / n2;  // rounding-consistent kappa
  spec.delta = delta;
  spec.lambda1 = lambda1;
  spec.lambda2 = lambda2;

  const OmegaParts parts = decompose_omega(delta, lambda1, lambda2, spec.kappa);
  spec.omega = parts.omega;

  const double kap = spec.kappa;
  const double inv_n2 = 1.0 / n2;
  const std::size_t k = delta.size();
  spec.d.resize(k);
  spec.ncp.resize(k);
  double tr_dag = 0.0, tr_dag2 = 0.0;
  double tr_om = 0.0, tr_om2 = 0.0, tr_co = 0.0, tr_co2 = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double w = parts.omega[i];
    const double di = kap * (kap - inv_n2) * w + (1.0 - inv_n2) * (1.0 - w);
    if (!(di > 0.0)) throw NumericError("build_nonnull: non-positive variance weight");
    spec.d[i] = di;
    spec.ncp[i] = n1 * parts.proj[i] * parts.proj[i];
    tr_dag += di;
    tr_dag2 += di * di;
    tr_om += w;
    tr_om2 += w * w;
    tr_co += 1.0 - w;
    tr_co2 += (1.0 - w) * (1.0 - w);
  }
  const double denom = kap * kap * (kap - inv_n2) * (tr_om2 + tr_om * tr_om) +
                       (1.0 - inv_n2) * (tr_co2 + tr_co * tr_co);
  if (!(denom > 0.0)) throw NumericError("build_nonnull: degenerate degrees of freedom");
  spec.nu = n2 * (tr_dag2 + tr_dag * tr_dag) / denom;
  if (!(spec.nu > spec.k - 1))
    throw NumericError("build_nonnull: denominator degrees of freedom too small");
  return spec;
}

std::vector<double> sample_nonnull(RngStream& rng, const NonNullSpec& spec, int draws) {
  if (draws < 1) throw std::invalid_argument("sample_nonnull: need draws >= 1");
  const std::size_t k = spec.d.size();
  std::vector<double> sqrt_ncp(k);
  for (std::size_t i = 0; i < k; ++i) sqrt_ncp[i] = std::sqrt(spec.ncp[i]);
  const double denom_df = spec.nu - spec.k + 1.0;

  std::vector<double> out(static_cast<std::size_t>(draws));
  for (int rep = 0; rep < draws; ++rep) {
    double num = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double z = normal_quantile(rng.uniform()) + sqrt_ncp[i];
      num += z * z / spec.d[i];
    }
    const double den = chisq_quantile(rng.uniform(), denom_df) / spec.nu;
    out[static_cast<std::size_t>(rep)] = num / den;
  }
  return out;
}

double nonnull_threshold(const NonNullSpec& spec, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("nonnull_threshold: alpha must be in (0, 1)");
  const int n = spec.n();
  if (n - spec.k - 1 < 1) throw std::invalid_argument("nonnull_threshold: need n > K + 1");
  const double d2 = static_cast<double>(n - spec.k - 1);
  const double fq = f_quantile(1.0 - alpha, static_cast<double>(spec.k), d2);
  return spec.k * spec.n2 * (1.0 + 1.0 / spec.kappa) * fq / d2;
}

PowerEstimate power_from_spec(RngStream& rng, const NonNullSpec& spec, double alpha,
                              int draws) {
  PowerEstimate est;
  est.threshold = nonnull_threshold(spec, alpha);
  est.draws = draws;
  const std::vector<double> sample = sample_nonnull(rng, spec, draws);
  int count = 0;
  for (double v : sample)
    if (v > est.threshold) ++count;
  est.power = static_cast<double>(count) / draws;
  est.se = std::sqrt(std::max(est.power * (1.0 - est.power), 0.0) / draws);
  return est;
}

PowerEstimate asymptotic_power(RngStream& rng, const std::vector<double>& delta,
                               const Matrix& lambda1, const Matrix& lambda2, double kappa,
                               double alpha, int draws) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("asymptotic_power: alpha must be in (0, 1)");
  if (draws < 1) throw std::invalid_argument("asymptotic_power: need draws >= 1");
  const OmegaParts parts = decompose_omega(delta, lambda1, lambda2, kappa);
  const std::size_t k = delta.size();

  std::vector<double> d(k), sqrt_ncp(k);
  for (std::size_t i = 0; i < k; ++i) {
    d[i] = 1.0 + (kappa * kappa - 1.0) * parts.omega[i];
    if (!(d[i] > 0.0)) throw NumericError("asymptotic_power: non-positive variance weight");
    sqrt_ncp[i] = std::fabs(parts.proj[i]);
  }

  PowerEstimate est;
  est.threshold = chisq_quantile(1.0 - alpha, static_cast<double>(k));
  est.draws = draws;
  int count = 0;
  for (int rep = 0; rep < draws; ++rep) {
    double v = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double z = normal_quantile(rng.uniform()) + sqrt_ncp[i];
      v += z * z / d[i];
    }
    if (kappa * v > est.threshold) ++count;
  }
  est.power = static_cast<double>(count) / draws;
  est.se = std::sqrt(std::max(est.power * (1.0 - est.power), 0.0) / draws);
  return est;
}

ModelComponents estimate_components(const PowerRequest& request) {
  if (!(request.tau2 >= 0.0)) throw std::invalid_argument("power: tau2 must be >= 0");
  request.design.validate();

  ModelComponents comp;
  const RngStream root(request.seed);
  if (request.lambda_source == LambdaSource::kDesignMc) {
    comp.eig = eigen_from_kernel(request.kernel, request.grid_size, request.pve);
    RngStream rng1 = root.substream(1);
    RngStream rng2 = root.substream(2);
    comp.lambda1 = score_cov_mc(rng1, comp.eig, request.design, nullptr, request.tau2,
                                request.score_cov_draws);
    comp.lambda2 = score_cov_mc(rng2, comp.eig, request.design, &request.eta, request.tau2,
                                request.score_cov_draws);
    comp.lambda_source = "design-mc";
  } else {
    const SparseDataset synth =
        generate_dataset(root.substream(3), request.synthetic_subjects,
                         request.synthetic_subjects, request.eta, request.kernel,
                         request.design, request.tau2);
    FpcaOptions opt;
    opt.grid_size = request.fit_grid_size;
    opt.pve = request.pve;
    opt.bw_mean = request.bw_mean;
    opt.bw_cov = request.bw_cov;
    opt.diag_band = request.diag_band;
    opt.cov_smoother = request.cov_smoother;
    const FpcaFit fit = fpca_fit(synth, opt);
    comp.eig = fit.eig;
    comp.lambda1 = fit.lambda1;
    comp.lambda2 = fit.lambda2;
    comp.fpca_tau2 = fit.tau2;
    comp.lambda_source = "synthetic-fpca";
  }
  comp.delta = project_meandiff(comp.eig, request.eta);
  return comp;
}

namespace {

std::pair<int, int> split_total(const PowerRequest& request) {
  if (request.n2 > 0) {
    const int n1 = static_cast<int>(std::ceil(request.kappa * request.n2 - 1e-9));
    return {n1, request.n2};
  }
  if (request.n_total < 4) throw std::invalid_argument("power: need a total sample size >= 4");
  const int n2 = static_cast<int>(std::lround(request.n_total / (1.0 + request.kappa)));
  return {request.n_total - n2, n2};
}

}  // namespace

PowerReport algorithm1_power(const PowerRequest& request, const ModelComponents& components) {
  PowerReport report;
  report.k = components.eig.K;
  report.pve_achieved = components.eig.pve_achieved;
  report.eigenvalues = components.eig.values;
  report.lambda_source = components.lambda_source;

  RngStream rng = RngStream(request.seed).substream(4);
  if (request.mode == PowerMode::kAsymptotic) {
    report.mode = "asymptotic";
    report.estimate = asymptotic_power(rng, components.delta, components.lambda1,
                                       components.lambda2, request.kappa, request.alpha,
                                       request.draws);
    report.spec.k = components.eig.K;
    report.spec.kappa = request.kappa;
    report.spec.delta = components.delta;
    report.spec.lambda1 = components.lambda1;
    report.spec.lambda2 = components.lambda2;
    return report;
  }

  report.mode = "exact";
  const auto [n1, n2] = split_total(request);
  (void)n1;
  report.spec = build_nonnull(components.delta, components.lambda1, components.lambda2,
                              request.kappa, n2);
  report.estimate = power_from_spec(rng, report.spec, request.alpha, request.draws);
  return report;
}

PowerReport algorithm1_power(const PowerRequest& request) {
  return algorithm1_power(request, estimate_components(request));
}

SampleSizeResult algorithm2_samplesize(const SampleSizeRequest& request,
                                       const ModelComponents& components) {
  const PowerRequest& base = request.base;
  if (!(request.target_power > base.alpha && request.target_power < 1.0))
    throw std::invalid_argument("samplesize: target power must be in (alpha, 1)");
  if (request.n2_min < 2) throw std::invalid_argument("samplesize: n2_min must be >= 2");
  if (request.n2_max <= request.n2_min)
    throw std::invalid_argument("samplesize: n2_max must exceed n2_min");

  const int k = components.eig.K;
  // Smallest n2 with valid degrees of freedom and at least 2 per group.
  int floor_n2 = std::max(request.n2_min, 2);
  while (static_cast<int>(std::ceil(base.kappa * floor_n2 - 1e-9)) < 2 ||
         static_cast<int>(std::ceil(base.kappa * floor_n2 - 1e-9)) + floor_n2 - k - 1 < 1)
    ++floor_n2;

  SampleSizeResult result;
  result.target = request.target_power;
  result.k = k;

  auto power_at = [&](int n2) {
    // Fresh stream per evaluation from a fixed substream index: common
    // random numbers across every candidate.
    RngStream rng = RngStream(base.seed).substream(5);
    const NonNullSpec spec = build_nonnull(components.delta, components.lambda1,
                                           components.lambda2, base.kappa, n2);
    const PowerEstimate est = power_from_spec(rng, spec, base.alpha, base.draws);
    result.curve.emplace_back(n2, est.power);
    return est.power;
  };

  double p_floor = power_at(floor_n2);
  int n2 = floor_n2;
  double p_at = p_floor;
  if (p_floor <= request.target_power) {
    // Doubling bracket, then bisection on (lo, hi].
    int lo = floor_n2;
    int hi = floor_n2;
    double p_hi = p_floor;
    while (p_hi <= request.target_power) {
      lo = hi;
      if (hi >= request.n2_max)
        throw NumericError("samplesize: target power unreachable below n2_max");
      hi = std::min(hi * 2, request.n2_max);
      p_hi = power_at(hi);
    }
    p_at = p_hi;
    while (hi - lo > 1) {
      const int mid = lo + (hi - lo) / 2;
      const double p_mid = power_at(mid);
      if (p_mid > request.target_power) {
        hi = mid;
        p_at = p_mid;
      } else {
        lo = mid;
      }
    }
    n2 = hi;
  }
  // Confirm minimality directly; common random numbers keep this stable.
  while (n2 > floor_n2) {
    const double p_prev = power_at(n2 - 1);
    if (p_prev <= request.target_power) {
      result.power_below = p_prev;
      break;
    }
    --n2;
    p_at = p_prev;
  }
  result.n2 = n2;
  result.n1 = static_cast<int>(std::ceil(base.kappa * n2 - 1e-9));
  result.power_at = p_at;
  return result;
}

SampleSizeResult algorithm2_samplesize(const SampleSizeRequest& request) {
  PowerRequest probe = request.base;
  probe.n2 = std::max(request.n2_min, 2);
  return algorithm2_samplesize(request, estimate_components(probe));
}

}  // namespace fdapower
