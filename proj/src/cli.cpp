#include "fdapower/cli.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fdapower/errors.hpp"
#include "fdapower/fpca.hpp"
#include "fdapower/harness.hpp"
#include "fdapower/pass.hpp"
#include "fdapower/testkit.hpp"

namespace fdapower::cli {

namespace {

constexpr int kSchemaVersion = 1;

// Strict object reader: every consumed key is recorded and finish() rejects
// anything left over, so typos in configs fail loudly.
class ConfigReader {
 public:
  ConfigReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const std::string& key) {
    if (!obj_.contains(key)) return false;
    seen_.insert(key);
    return true;
  }

  const json& child(const std::string& key) {
    require(key);
    return obj_.at(key);
  }

  double number(const std::string& key) {
    require(key);
    return as_number(obj_.at(key), key);
  }
  double number(const std::string& key, double fallback) {
    return has(key) ? as_number(obj_.at(key), key) : fallback;
  }

  int integer(const std::string& key) {
    require(key);
    return as_integer(obj_.at(key), key);
  }
  int integer(const std::string& key, int fallback) {
    return has(key) ? as_integer(obj_.at(key), key) : fallback;
  }

  std::uint64_t seed(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = obj_.at(key);
    if (!v.is_number_integer() && !v.is_number_unsigned())
      throw ConfigError(path_ + "." + key + ": expected an integer seed");
    if (v.is_number_integer() && v.get<std::int64_t>() < 0)
      throw ConfigError(path_ + "." + key + ": seed must be non-negative");
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = obj_.at(key);
    if (!v.is_boolean()) throw ConfigError(path_ + "." + key + ": expected true or false");
    return v.get<bool>();
  }

  std::string str(const std::string& key) {
    require(key);
    return as_str(obj_.at(key), key);
  }
  std::string str(const std::string& key, const std::string& fallback) {
    return has(key) ? as_str(obj_.at(key), key) : fallback;
  }

  std::vector<double> number_list(const std::string& key) {
    require(key);
    return as_number_list(obj_.at(key), key);
  }
  std::vector<double> number_list(const std::string& key, std::vector<double> fallback) {
    return has(key) ? as_number_list(obj_.at(key), key) : std::move(fallback);
  }

  std::vector<int> integer_list(const std::string& key) {
    require(key);
    const json& v = obj_.at(key);
    if (!v.is_array()) throw ConfigError(path_ + "." + key + ": expected an array");
    std::vector<int> out;
    for (const json& e : v) out.push_back(as_integer(e, key));
    return out;
  }

  void finish() const {
    for (const auto& item : obj_.items())
      if (seen_.find(item.key()) == seen_.end())
        throw ConfigError(path_ + ": unknown key '" + item.key() + "'");
  }

 private:
  void require(const std::string& key) {
    if (!has(key)) throw ConfigError(path_ + ": missing required key '" + key + "'");
  }
  double as_number(const json& v, const std::string& key) const {
    if (!v.is_number()) throw ConfigError(path_ + "." + key + ": expected a number");
    return v.get<double>();
  }
  int as_integer(const json& v, const std::string& key) const {
    if (!v.is_number_integer() && !v.is_number_unsigned())
      throw ConfigError(path_ + "." + key + ": expected an integer");
    return v.get<int>();
  }
  std::string as_str(const json& v, const std::string& key) const {
    if (!v.is_string()) throw ConfigError(path_ + "." + key + ": expected a string");
    return v.get<std::string>();
  }
  std::vector<double> as_number_list(const json& v, const std::string& key) const {
    if (!v.is_array()) throw ConfigError(path_ + "." + key + ": expected an array");
    std::vector<double> out;
    for (const json& e : v) out.push_back(as_number(e, key));
    return out;
  }

  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

CovarianceKernel parse_kernel(const json& j) {
  ConfigReader r(j, "kernel");
  const std::string type = r.str("type");
  if (type == "car1") {
    const double sigma2 = r.number("sigma2", 1.0);
    const double base = r.number("base", 0.5);
    r.finish();
    return CovarianceKernel::car1(sigma2, base);
  }
  if (type == "compound-symmetry") {
    const double sigma2 = r.number("sigma2", 1.0);
    const double rho = r.number("rho", 0.5);
    r.finish();
    return CovarianceKernel::compound_symmetry(sigma2, rho);
  }
  if (type == "nonstationary-rank2") {
    r.finish();
    return CovarianceKernel::nonstationary_rank2();
  }
  if (type == "grid") {
    const std::vector<double> grid = r.number_list("grid");
    const json& rows = r.child("values");
    if (!rows.is_array() || rows.size() != grid.size())
      throw ConfigError("kernel.values: expected one row per grid point");
    Matrix values(grid.size(), grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const json& row = rows.at(i);
      if (!row.is_array() || row.size() != grid.size())
        throw ConfigError("kernel.values: expected square numeric rows");
      for (std::size_t jcol = 0; jcol < grid.size(); ++jcol) {
        if (!row.at(jcol).is_number()) throw ConfigError("kernel.values: expected numbers");
        values(i, jcol) = row.at(jcol).get<double>();
      }
    }
    r.finish();
    return CovarianceKernel::from_grid(grid, values);
  }
  throw ConfigError("kernel.type: unknown kernel '" + type + "'");
}

MeanDiff parse_effect(const json& j) {
  ConfigReader r(j, "effect");
  const std::string type = r.str("type");
  const double scale = r.number("scale", 1.0);
  MeanDiff eta;
  if (type == "polynomial") {
    eta = MeanDiff::polynomial(r.number_list("coefficients"));
  } else if (type == "piecewise-linear") {
    eta = MeanDiff::piecewise_linear(r.number_list("grid"), r.number_list("values"));
  } else if (type == "zero") {
    eta = MeanDiff::zero();
  } else {
    throw ConfigError("effect.type: unknown effect '" + type + "'");
  }
  r.finish();
  return eta.scaled(scale);
}

SamplingDesign parse_design(const json& j) {
  ConfigReader r(j, "design");
  SamplingDesign d;
  if (r.has("count")) {
    const json& c = j.at("count");
    if (c.is_number_integer() || c.is_number_unsigned()) {
      d.count_min = d.count_max = c.get<int>();
    } else if (c.is_object()) {
      ConfigReader cr(c, "design.count");
      d.count_min = cr.integer("min");
      d.count_max = cr.integer("max");
      cr.finish();
    } else {
      throw ConfigError("design.count: expected an integer or {min, max}");
    }
  }
  if (r.has("times")) {
    const json& t = j.at("times");
    if (t.is_string()) {
      if (t.get<std::string>() != "uniform")
        throw ConfigError("design.times: expected \"uniform\" or a schedule array");
    } else if (t.is_array()) {
      for (const json& e : t) {
        if (!e.is_number()) throw ConfigError("design.times: expected numbers");
        d.schedule.push_back(e.get<double>());
      }
    } else {
      throw ConfigError("design.times: expected \"uniform\" or a schedule array");
    }
  }
  d.missing = r.number("missing", 0.0);
  d.min_observations = r.integer("min_observations", 1);
  r.finish();
  d.validate();
  return d;
}

CovSmoother parse_cov_smoother(const std::string& name) {
  if (name == "nadaraya-watson") return CovSmoother::kNadarayaWatson;
  if (name == "local-linear") return CovSmoother::kLocalLinear;
  throw ConfigError("cov_smoother: expected \"nadaraya-watson\" or \"local-linear\"");
}

// Keys shared by power, samplesize and validate configs.
PowerRequest parse_model(ConfigReader& r, const json& j) {
  PowerRequest req;
  req.seed = r.seed("seed", 1);
  req.alpha = r.number("alpha", 0.05);
  if (!(req.alpha > 0.0 && req.alpha < 1.0)) throw ConfigError("alpha: must be in (0, 1)");
  if (r.has("kernel")) req.kernel = parse_kernel(j.at("kernel"));
  if (r.has("effect")) req.eta = parse_effect(j.at("effect"));
  if (r.has("design")) req.design = parse_design(j.at("design"));
  req.tau2 = r.number("tau2", 0.001);
  if (!(req.tau2 >= 0.0)) throw ConfigError("tau2: must be >= 0");
  req.pve = r.number("pve", 0.95);
  if (!(req.pve > 0.0 && req.pve <= 1.0)) throw ConfigError("pve: must be in (0, 1]");
  req.grid_size = r.integer("grid_size", 100);
  req.fit_grid_size = r.integer("fit_grid_size", 100);
  req.draws = r.integer("draws", 100000);
  if (req.draws < 100) throw ConfigError("draws: need at least 100");
  req.kappa = r.number("kappa", 1.0);
  if (!(req.kappa > 0.0)) throw ConfigError("kappa: must be positive");
  req.score_cov_draws = r.integer("score_cov_draws", 10000);
  req.synthetic_subjects = r.integer("synthetic_subjects", 10000);
  if (req.synthetic_subjects < 100) throw ConfigError("synthetic_subjects: need at least 100");
  req.bw_mean = r.number("bw_mean", 0.1);
  req.bw_cov = r.number("bw_cov", 0.15);
  req.diag_band = r.number("diag_band", 0.05);
  req.cov_smoother = parse_cov_smoother(r.str("cov_smoother", "nadaraya-watson"));

  const std::string source = r.str("lambda_source", "design-mc");
  if (source == "design-mc")
    req.lambda_source = LambdaSource::kDesignMc;
  else if (source == "synthetic-fpca")
    req.lambda_source = LambdaSource::kSyntheticFpca;
  else
    throw ConfigError("lambda_source: expected \"design-mc\" or \"synthetic-fpca\"");

  const std::string mode = r.str("mode", "exact");
  if (mode == "exact")
    req.mode = PowerMode::kExact;
  else if (mode == "asymptotic")
    req.mode = PowerMode::kAsymptotic;
  else
    throw ConfigError("mode: expected \"exact\" or \"asymptotic\"");
  return req;
}

ordered_json eigen_summary(const PowerReport& report) {
  ordered_json out;
  out["k"] = report.k;
  out["pve_achieved"] = report.pve_achieved;
  out["eigenvalues"] = report.eigenvalues;
  out["delta"] = report.spec.delta;
  out["lambda_source"] = report.lambda_source;
  return out;
}

ordered_json power_point(const PowerReport& report) {
  ordered_json out;
  if (report.mode == "exact") {
    out["n_total"] = report.spec.n();
    out["n1"] = report.spec.n1;
    out["n2"] = report.spec.n2;
    out["nu"] = report.spec.nu;
  }
  out["power"] = report.estimate.power;
  out["se"] = report.estimate.se;
  out["threshold"] = report.estimate.threshold;
  out["draws"] = report.estimate.draws;
  return out;
}

std::string fmt_number(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string fmt_cell(const ordered_json& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_float()) return fmt_number(v.get<double>());
  return v.dump();
}

void csv_row(std::string& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  out += "\r\n";
}

}  // namespace

ordered_json run_power(const json& config) {
  ConfigReader r(config, "config");
  const std::string label = r.str("label", "");
  PowerRequest req = parse_model(r, config);

  const bool has_n_total = r.has("n_total");
  const bool has_n2 = r.has("n2");
  std::vector<int> n_values;
  if (r.has("n_values")) {
    n_values = r.integer_list("n_values");
    if (n_values.empty()) throw ConfigError("n_values: expected a non-empty array");
  }
  if (has_n_total) req.n_total = r.integer("n_total");
  if (has_n2) req.n2 = r.integer("n2");
  if (!has_n_total && !has_n2 && n_values.empty() && req.mode == PowerMode::kExact)
    throw ConfigError("config: exact power needs n_total, n2 or n_values");
  r.finish();

  const ModelComponents components = estimate_components(req);

  ordered_json out;
  out["schema_version"] = kSchemaVersion;
  out["subcommand"] = "power";
  if (!label.empty()) out["label"] = label;
  out["alpha"] = req.alpha;
  out["kappa"] = req.kappa;
  out["mode"] = req.mode == PowerMode::kExact ? "exact" : "asymptotic";
  out["tau2"] = req.tau2;
  out["seed"] = req.seed;

  bool wrote_model = false;
  if (has_n_total || has_n2 || req.mode == PowerMode::kAsymptotic) {
    const PowerReport report = algorithm1_power(req, components);
    out["model"] = eigen_summary(report);
    wrote_model = true;
    out["result"] = power_point(report);
  }
  if (!n_values.empty()) {
    ordered_json curve = ordered_json::array();
    for (int n : n_values) {
      PowerRequest point = req;
      point.n2 = 0;
      point.n_total = n;
      point.mode = PowerMode::kExact;
      const PowerReport report = algorithm1_power(point, components);
      if (!wrote_model) {
        out["model"] = eigen_summary(report);
        wrote_model = true;
      }
      curve.push_back(power_point(report));
    }
    out["curve"] = std::move(curve);
  }
  return out;
}

ordered_json run_samplesize(const json& config) {
  ConfigReader r(config, "config");
  const std::string label = r.str("label", "");
  SampleSizeRequest req;
  req.base = parse_model(r, config);
  if (req.base.mode == PowerMode::kAsymptotic)
    throw ConfigError("mode: sample size search uses the exact mode");

  std::vector<double> targets;
  if (r.has("target_powers")) {
    targets = r.number_list("target_powers");
  } else {
    targets.push_back(r.number("target_power"));
  }
  if (targets.empty()) throw ConfigError("target_powers: expected a non-empty array");
  for (double g : targets)
    if (!(g > req.base.alpha && g < 1.0))
      throw ConfigError("target_power: must be in (alpha, 1)");
  req.n2_min = r.integer("n2_min", 3);
  req.n2_max = r.integer("n2_max", 1000000);
  r.finish();

  PowerRequest probe = req.base;
  probe.n2 = std::max(req.n2_min, 2);
  const ModelComponents components = estimate_components(probe);

  ordered_json out;
  out["schema_version"] = kSchemaVersion;
  out["subcommand"] = "samplesize";
  if (!label.empty()) out["label"] = label;
  out["alpha"] = req.base.alpha;
  out["kappa"] = req.base.kappa;
  out["draws"] = req.base.draws;
  out["seed"] = req.base.seed;
  ordered_json model;
  model["k"] = components.eig.K;
  model["pve_achieved"] = components.eig.pve_achieved;
  model["eigenvalues"] = components.eig.values;
  model["delta"] = components.delta;
  model["lambda_source"] = components.lambda_source;
  out["model"] = std::move(model);

  ordered_json results = ordered_json::array();
  for (double g : targets) {
    SampleSizeRequest one = req;
    one.target_power = g;
    const SampleSizeResult res = algorithm2_samplesize(one, components);
    ordered_json entry;
    entry["target_power"] = g;
    entry["n1"] = res.n1;
    entry["n2"] = res.n2;
    entry["n_total"] = res.n1 + res.n2;
    entry["power_at"] = res.power_at;
    entry["power_below"] = res.power_below;
    ordered_json curve = ordered_json::array();
    for (const auto& [n2, p] : res.curve) {
      ordered_json pt;
      pt["n2"] = n2;
      pt["power"] = p;
      curve.push_back(std::move(pt));
    }
    entry["evaluations"] = std::move(curve);
    results.push_back(std::move(entry));
  }
  out["results"] = std::move(results);
  return out;
}

ordered_json run_validate(const json& config) {
  ConfigReader r(config, "config");
  const std::string label = r.str("label", "");
  PowerRequest base = parse_model(r, config);

  const std::vector<double> eta_values = r.number_list("eta_values");
  const std::vector<int> n_values = r.integer_list("n_values");
  const std::vector<double> missing_values = r.number_list("missing_values", {base.design.missing});
  if (eta_values.empty() || n_values.empty() || missing_values.empty())
    throw ConfigError("config: eta_values, n_values and missing_values must be non-empty");
  const int replications = r.integer("replications", 500);
  const bool want_theoretical = r.boolean("theoretical", true);
  const bool want_empirical = r.boolean("empirical", true);
  if (!want_theoretical && !want_empirical)
    throw ConfigError("config: nothing to do (theoretical and empirical both false)");

  HarnessOptions hopt;
  hopt.replications = replications;
  hopt.alpha = base.alpha;
  hopt.pve = base.pve;
  hopt.grid_size = base.grid_size;
  hopt.fit_grid_size = r.integer("harness_grid_size", 51);
  // Replicate-level fits run on far less data than the component fit, so the
  // smoothing controls default to the standard bandwidths instead of
  // inheriting the model-level overrides.
  hopt.bw_mean = r.number("harness_bw_mean", 0.1);
  hopt.bw_cov = r.number("harness_bw_cov", 0.15);
  hopt.diag_band = r.number("harness_diag_band", 0.05);
  hopt.cov_smoother = parse_cov_smoother(r.str("harness_cov_smoother", "nadaraya-watson"));
  const std::string hmode = r.str("harness_mode", "empirical-fpca");
  if (hmode == "empirical-fpca")
    hopt.mode = HarnessMode::kEmpiricalFpca;
  else if (hmode == "known-eigen")
    hopt.mode = HarnessMode::kKnownEigen;
  else
    throw ConfigError("harness_mode: expected \"empirical-fpca\" or \"known-eigen\"");
  r.finish();

  const MeanDiff shape = base.eta;
  const RngStream root(base.seed);

  EigenSystem known_eig;
  if (want_empirical && hopt.mode == HarnessMode::kKnownEigen)
    known_eig = eigen_from_kernel(base.kernel, base.grid_size, base.pve);

  std::vector<ComparisonCell> cells;
  for (std::size_t ie = 0; ie < eta_values.size(); ++ie) {
    for (std::size_t im = 0; im < missing_values.size(); ++im) {
      PowerRequest level = base;
      level.eta = shape.scaled(eta_values[ie]);
      level.design.missing = missing_values[im];

      ModelComponents components;
      bool have_components = false;
      if (want_theoretical) {
        components = estimate_components(level);
        have_components = true;
      }
      for (std::size_t in = 0; in < n_values.size(); ++in) {
        ComparisonCell cell;
        cell.eta = eta_values[ie];
        cell.n_total = n_values[in];
        cell.missing = missing_values[im];
        if (have_components) {
          PowerRequest point = level;
          point.n_total = n_values[in];
          point.mode = PowerMode::kExact;
          const PowerReport rep = algorithm1_power(point, components);
          cell.k = rep.k;
          cell.theoretical = rep.estimate.power;
        }
        if (want_empirical) {
          const int n2 =
              static_cast<int>(std::lround(n_values[in] / (1.0 + base.kappa)));
          const int n1 = n_values[in] - n2;
          const std::uint64_t idx = (ie * 1000 + im) * 1000 + in;
          cell.empirical = empirical_power(root.substream(idx), level.eta, base.kernel,
                                           level.design, base.tau2, n1, n2, hopt,
                                           hopt.mode == HarnessMode::kKnownEigen ? &known_eig
                                                                                 : nullptr);
        }
        cells.push_back(std::move(cell));
      }
    }
  }
  flag_comparisons(cells);

  ordered_json out;
  out["schema_version"] = kSchemaVersion;
  out["subcommand"] = "validate";
  if (!label.empty()) out["label"] = label;
  out["alpha"] = base.alpha;
  out["seed"] = base.seed;
  out["harness_mode"] = hmode;
  out["replications"] = replications;
  ordered_json rows = ordered_json::array();
  for (const ComparisonCell& cell : cells) {
    ordered_json row;
    row["eta"] = cell.eta;
    row["n_total"] = cell.n_total;
    row["missing"] = cell.missing;
    if (cell.theoretical.has_value()) {
      row["k"] = cell.k;
      row["theoretical"] = cell.theoretical.value();
    } else {
      row["k"] = nullptr;
      row["theoretical"] = nullptr;
    }
    if (cell.empirical.has_value()) {
      const EmpiricalCell& emp = cell.empirical.value();
      row["empirical"] = emp.rate;
      row["ci_lo"] = emp.ci_lo;
      row["ci_hi"] = emp.ci_hi;
      row["successes"] = emp.successes;
      row["failures"] = emp.failures;
      row["rejections"] = emp.rejections;
    } else {
      row["empirical"] = nullptr;
      row["ci_lo"] = nullptr;
      row["ci_hi"] = nullptr;
      row["successes"] = nullptr;
      row["failures"] = nullptr;
      row["rejections"] = nullptr;
    }
    row["flagged"] = cell.flagged;
    rows.push_back(std::move(row));
  }
  out["cells"] = std::move(rows);
  return out;
}

CsvDataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("csv: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "subject_id,group,time,value")
    throw ConfigError("csv line 1: header must be 'subject_id,group,time,value'");

  struct Key {
    int group;
    long long id;
    bool operator<(const Key& o) const {
      return group != o.group ? group < o.group : id < o.id;
    }
  };
  std::map<Key, std::size_t> index;
  CsvDataset out;
  std::vector<Subject>& subjects = out.data.subjects;

  double tmin = 1e300, tmax = -1e300;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::array<std::string, 4> fields;
    std::size_t field = 0, start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == ',') {
        if (field >= 4) throw ConfigError("csv line " + std::to_string(line_no) +
                                          ": expected 4 fields");
        fields[field++] = line.substr(start, i - start);
        start = i + 1;
      }
    }
    if (field != 4)
      throw ConfigError("csv line " + std::to_string(line_no) + ": expected 4 fields");

    const auto parse_ll = [&](const std::string& s, const char* what) {
      long long v = 0;
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ConfigError("csv line " + std::to_string(line_no) + ": bad " + what + " '" + s +
                          "'");
      return v;
    };
    const auto parse_d = [&](const std::string& s, const char* what) {
      double v = 0.0;
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v))
        throw ConfigError("csv line " + std::to_string(line_no) + ": bad " + what + " '" + s +
                          "'");
      return v;
    };

    const long long id = parse_ll(fields[0], "subject_id");
    const long long group = parse_ll(fields[1], "group");
    if (group != 1 && group != 2)
      throw ConfigError("csv line " + std::to_string(line_no) + ": group must be 1 or 2");
    const double t = parse_d(fields[2], "time");
    const double y = parse_d(fields[3], "value");

    const Key key{static_cast<int>(group), id};
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, subjects.size()).first;
      Subject subj;
      subj.id = static_cast<int>(id);
      subj.group = static_cast<int>(group);
      subjects.push_back(std::move(subj));
    }
    subjects[it->second].times.push_back(t);
    subjects[it->second].values.push_back(y);
    tmin = std::min(tmin, t);
    tmax = std::max(tmax, t);
  }
  if (subjects.empty()) throw ConfigError("csv: no data rows");
  if (!(tmax > tmin)) throw ConfigError("csv: degenerate time range");

  for (Subject& subj : subjects) {
    for (double& t : subj.times) t = (t - tmin) / (tmax - tmin);
    (subj.group == 1 ? out.data.n1 : out.data.n2)++;
  }
  if (out.data.n1 < 2 || out.data.n2 < 2)
    throw ConfigError("csv: need at least 2 subjects in each group");
  out.time_min = tmin;
  out.time_max = tmax;
  return out;
}

ordered_json run_test(const json& config) {
  ConfigReader r(config, "config");
  const std::string label = r.str("label", "");
  const std::string path = r.str("csv");
  const double alpha = r.number("alpha", 0.05);
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha: must be in (0, 1)");
  FpcaOptions fopt;
  fopt.pve = r.number("pve", 0.95);
  if (!(fopt.pve > 0.0 && fopt.pve <= 1.0)) throw ConfigError("pve: must be in (0, 1]");
  fopt.grid_size = r.integer("grid_size", 51);
  fopt.bw_mean = r.number("bw_mean", 0.1);
  fopt.bw_cov = r.number("bw_cov", 0.15);
  fopt.diag_band = r.number("diag_band", 0.05);
  fopt.cov_smoother = parse_cov_smoother(r.str("cov_smoother", "nadaraya-watson"));
  const std::string rule_name = r.str("rule", "scaled-f");
  NullRule rule;
  if (rule_name == "scaled-f")
    rule = NullRule::kScaledF;
  else if (rule_name == "chi-square")
    rule = NullRule::kChiSq;
  else
    throw ConfigError("rule: expected \"scaled-f\" or \"chi-square\"");
  r.finish();

  std::ifstream in(path);
  if (!in) throw ConfigError("csv: cannot open '" + path + "'");
  const CsvDataset csv = read_dataset_csv(in);

  const FpcaFit fit = fpca_fit(csv.data, fopt);
  const TestResult res = test_decision(fit.scores1, fit.scores2, alpha, rule);

  ordered_json out;
  out["schema_version"] = kSchemaVersion;
  out["subcommand"] = "test";
  if (!label.empty()) out["label"] = label;
  out["alpha"] = alpha;
  out["rule"] = rule_name;
  out["statistic"] = res.statistic;
  out["p_value"] = res.p_value;
  out["reject"] = res.reject;
  out["threshold"] = res.threshold;
  out["k"] = res.k;
  out["n1"] = res.n1;
  out["n2"] = res.n2;
  out["tau2_hat"] = fit.tau2;
  out["pve_achieved"] = fit.eig.pve_achieved;
  out["eigenvalues"] = fit.eig.values;
  out["time_span"] = ordered_json::array({csv.time_min, csv.time_max});
  ordered_json curve;
  curve["time"] = fit.grid;
  ordered_json diff = ordered_json::array();
  for (std::size_t i = 0; i < fit.grid.size(); ++i)
    diff.push_back(fit.mean_group2[i] - fit.mean_group1[i]);
  curve["difference"] = std::move(diff);
  out["effect_curve"] = std::move(curve);
  return out;
}

std::string report_to_csv(const ordered_json& report) {
  const std::string sub = report.value("subcommand", "");
  std::string out;
  const auto field = [](const ordered_json& obj, const char* key) {
    return obj.contains(key) ? fmt_cell(obj.at(key)) : std::string();
  };
  if (sub == "power") {
    csv_row(out, {"n_total", "n1", "n2", "k", "power", "se", "threshold", "draws"});
    const std::string k = report.contains("model") ? field(report.at("model"), "k") : "";
    auto write_point = [&](const ordered_json& pt) {
      csv_row(out, {field(pt, "n_total"), field(pt, "n1"), field(pt, "n2"), k,
                    field(pt, "power"), field(pt, "se"), field(pt, "threshold"),
                    field(pt, "draws")});
    };
    if (report.contains("result")) write_point(report.at("result"));
    if (report.contains("curve"))
      for (const auto& pt : report.at("curve")) write_point(pt);
    return out;
  }
  if (sub == "samplesize") {
    csv_row(out, {"target_power", "n1", "n2", "n_total", "power_at", "power_below", "k"});
    const std::string k = field(report.at("model"), "k");
    for (const auto& res : report.at("results"))
      csv_row(out, {field(res, "target_power"), field(res, "n1"), field(res, "n2"),
                    field(res, "n_total"), field(res, "power_at"), field(res, "power_below"),
                    k});
    return out;
  }
  if (sub == "validate") {
    csv_row(out, {"eta", "n_total", "missing", "k", "theoretical", "empirical", "ci_lo",
                  "ci_hi", "successes", "failures", "rejections", "flagged"});
    for (const auto& cell : report.at("cells"))
      csv_row(out, {field(cell, "eta"), field(cell, "n_total"), field(cell, "missing"),
                    field(cell, "k"), field(cell, "theoretical"), field(cell, "empirical"),
                    field(cell, "ci_lo"), field(cell, "ci_hi"), field(cell, "successes"),
                    field(cell, "failures"), field(cell, "rejections"),
                    field(cell, "flagged")});
    return out;
  }
  if (sub == "test") {
    csv_row(out, {"statistic", "p_value", "reject", "k", "n1", "n2", "threshold", "tau2_hat"});
    csv_row(out, {field(report, "statistic"), field(report, "p_value"),
                  field(report, "reject"), field(report, "k"), field(report, "n1"),
                  field(report, "n2"), field(report, "threshold"),
                  field(report, "tau2_hat")});
    return out;
  }
  throw ConfigError("report_to_csv: unknown subcommand '" + sub + "'");
}

}  // namespace fdapower::cli
