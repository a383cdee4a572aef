#include <pybind11/pybind11.h>

#include <cstdint>
#include <string>
#include <vector>

#include "fdapower/cli.hpp"
#include "fdapower/errors.hpp"
#include "fdapower/matrix.hpp"
#include "fdapower/pass.hpp"
#include "fdapower/probdist.hpp"
#include "fdapower/rng.hpp"
#include "fdapower/testkit.hpp"
#include "fdapower/version.hpp"

namespace py = pybind11;

namespace {

using fdapower::cli::json;
using fdapower::cli::ordered_json;

json to_json(const py::handle& obj) {
  if (obj.is_none()) return nullptr;
  if (py::isinstance<py::bool_>(obj)) return obj.cast<bool>();
  if (py::isinstance<py::int_>(obj)) return obj.cast<std::int64_t>();
  if (py::isinstance<py::float_>(obj)) return obj.cast<double>();
  if (py::isinstance<py::str>(obj)) return obj.cast<std::string>();
  if (py::isinstance<py::dict>(obj)) {
    json out = json::object();
    for (const auto& item : obj.cast<py::dict>())
      out[py::str(item.first).cast<std::string>()] = to_json(item.second);
    return out;
  }
  if (py::isinstance<py::sequence>(obj)) {
    json out = json::array();
    for (const auto& e : obj.cast<py::sequence>()) out.push_back(to_json(e));
    return out;
  }
  throw fdapower::ConfigError("config: unsupported value type '" +
                              py::str(py::type::of(obj)).cast<std::string>() + "'");
}

py::object from_json(const ordered_json& j) {
  switch (j.type()) {
    case ordered_json::value_t::null:
      return py::none();
    case ordered_json::value_t::boolean:
      return py::bool_(j.get<bool>());
    case ordered_json::value_t::number_integer:
      return py::int_(j.get<std::int64_t>());
    case ordered_json::value_t::number_unsigned:
      return py::int_(j.get<std::uint64_t>());
    case ordered_json::value_t::number_float:
      return py::float_(j.get<double>());
    case ordered_json::value_t::string:
      return py::str(j.get<std::string>());
    case ordered_json::value_t::array: {
      py::list out;
      for (const auto& e : j) out.append(from_json(e));
      return out;
    }
    case ordered_json::value_t::object: {
      py::dict out;
      for (const auto& item : j.items()) out[py::str(item.key())] = from_json(item.value());
      return out;
    }
    default:
      throw fdapower::NumericError("report: unsupported JSON value");
  }
}

fdapower::Matrix matrix_from(const std::vector<std::vector<double>>& rows, const char* what) {
  if (rows.empty()) throw fdapower::ConfigError(std::string(what) + ": empty matrix");
  fdapower::Matrix out(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size())
      throw fdapower::ConfigError(std::string(what) + ": ragged rows");
    for (std::size_t jcol = 0; jcol < rows[i].size(); ++jcol) out(i, jcol) = rows[i][jcol];
  }
  return out;
}

std::vector<std::vector<double>> rows_from(const py::sequence& seq, const char* what) {
  std::vector<std::vector<double>> rows;
  for (const auto& row : seq) {
    std::vector<double> r;
    for (const auto& v : row.cast<py::sequence>()) r.push_back(v.cast<double>());
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw fdapower::ConfigError(std::string(what) + ": empty matrix");
  return rows;
}

py::dict run_driver(ordered_json (*driver)(const json&), const py::dict& config) {
  return from_json(driver(to_json(config)));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Power and sample size for two-sample projection tests of sparse functional data";
  m.attr("__version__") = fdapower::kVersion;

  py::register_exception<fdapower::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<fdapower::NumericError>(m, "NumericError", PyExc_RuntimeError);

  m.def(
      "power", [](const py::dict& config) { return run_driver(fdapower::cli::run_power, config); },
      py::arg("config"),
      "Exact or asymptotic power of the projection test for one configuration.");
  m.def(
      "sample_size",
      [](const py::dict& config) { return run_driver(fdapower::cli::run_samplesize, config); },
      py::arg("config"), "Smallest group sizes whose exact power exceeds the target.");
  m.def(
      "validate",
      [](const py::dict& config) { return run_driver(fdapower::cli::run_validate, config); },
      py::arg("config"), "Computed power versus simulated rejection rates over a grid.");
  m.def(
      "test_csv",
      [](const py::dict& config) { return run_driver(fdapower::cli::run_test, config); },
      py::arg("config"), "Run the two-sample test on a CSV dataset named in the config.");

  m.def(
      "hotelling_test",
      [](const py::sequence& scores1, const py::sequence& scores2, double alpha,
         const std::string& rule) {
        const fdapower::Matrix s1 = matrix_from(rows_from(scores1, "scores1"), "scores1");
        const fdapower::Matrix s2 = matrix_from(rows_from(scores2, "scores2"), "scores2");
        fdapower::NullRule r;
        if (rule == "scaled-f")
          r = fdapower::NullRule::kScaledF;
        else if (rule == "chi-square")
          r = fdapower::NullRule::kChiSq;
        else
          throw fdapower::ConfigError("rule: expected \"scaled-f\" or \"chi-square\"");
        const fdapower::TestResult res = fdapower::test_decision(s1, s2, alpha, r);
        py::dict out;
        out["statistic"] = res.statistic;
        out["threshold"] = res.threshold;
        out["p_value"] = res.p_value;
        out["reject"] = res.reject;
        out["k"] = res.k;
        out["n1"] = res.n1;
        out["n2"] = res.n2;
        return out;
      },
      py::arg("scores1"), py::arg("scores2"), py::arg("alpha") = 0.05,
      py::arg("rule") = "scaled-f",
      "Two-sample test decision from per-subject score rows (one row per subject).");

  m.def(
      "exact_power",
      [](const std::vector<double>& delta, const py::sequence& lambda1,
         const py::sequence& lambda2, double kappa, int n2, double alpha, int draws,
         std::uint64_t seed) {
        const fdapower::Matrix l1 = matrix_from(rows_from(lambda1, "lambda1"), "lambda1");
        const fdapower::Matrix l2 = matrix_from(rows_from(lambda2, "lambda2"), "lambda2");
        const fdapower::NonNullSpec spec =
            fdapower::build_nonnull(delta, l1, l2, kappa, n2);
        fdapower::RngStream rng(seed);
        const fdapower::PowerEstimate est =
            fdapower::power_from_spec(rng, spec, alpha, draws);
        py::dict out;
        out["power"] = est.power;
        out["se"] = est.se;
        out["threshold"] = est.threshold;
        out["draws"] = est.draws;
        out["nu"] = spec.nu;
        out["k"] = spec.k;
        out["n1"] = spec.n1;
        out["n2"] = spec.n2;
        return out;
      },
      py::arg("delta"), py::arg("lambda1"), py::arg("lambda2"), py::arg("kappa"),
      py::arg("n2"), py::arg("alpha") = 0.05, py::arg("draws") = 100000, py::arg("seed") = 1,
      "Finite-sample power from explicit score means and covariances.");

  m.def("f_quantile", &fdapower::f_quantile, py::arg("p"), py::arg("d1"), py::arg("d2"),
        "Quantile of the F distribution.");
  m.def("chisq_quantile", &fdapower::chisq_quantile, py::arg("p"), py::arg("df"),
        "Quantile of the chi-square distribution.");
}
