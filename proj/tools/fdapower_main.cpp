#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fdapower/cli.hpp"
#include "fdapower/errors.hpp"
#include "fdapower/version.hpp"

namespace {

using fdapower::cli::json;
using fdapower::cli::ordered_json;

struct Args {
  std::string config_path;
  std::string csv_path;  // test only: dataset override / shorthand
  std::string out_path;
  std::string format = "json";
  std::optional<std::uint64_t> seed;
  std::optional<int> draws;
  std::optional<int> replications;
};

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw fdapower::ConfigError("cannot open config '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw fdapower::ConfigError("config '" + path + "': " + e.what());
  }
}

void emit(const ordered_json& report, const Args& args) {
  std::string text;
  if (args.format == "csv")
    text = fdapower::cli::report_to_csv(report);
  else
    text = report.dump(2) + "\n";
  if (args.out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(args.out_path, std::ios::binary);
  if (!out) throw fdapower::ConfigError("cannot open output '" + args.out_path + "'");
  out << text;
}

void add_common(CLI::App* cmd, Args& args, bool config_required) {
  auto* opt = cmd->add_option("-c,--config", args.config_path, "JSON configuration file");
  if (config_required) opt->required();
  cmd->add_option("-o,--out", args.out_path, "write the report here instead of stdout");
  cmd->add_option("--format", args.format, "report format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  cmd->add_option("--seed", args.seed, "override the configured seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Power and sample size for two-sample testing of sparse functional data"};
  app.set_version_flag("--version", std::string(fdapower::kVersion));
  app.require_subcommand(1);

  Args args;
  CLI::App* power = app.add_subcommand("power", "exact or asymptotic power of the test");
  add_common(power, args, true);
  power->add_option("--draws", args.draws, "override the number of Monte Carlo draws");

  CLI::App* samplesize =
      app.add_subcommand("samplesize", "smallest group sizes reaching a target power");
  add_common(samplesize, args, true);
  samplesize->add_option("--draws", args.draws, "override the number of Monte Carlo draws");

  CLI::App* validate =
      app.add_subcommand("validate", "compare computed power against simulated rejection rates");
  add_common(validate, args, true);
  validate->add_option("--draws", args.draws, "override the number of Monte Carlo draws");
  validate->add_option("--reps", args.replications, "override the number of replications");

  CLI::App* test = app.add_subcommand("test", "run the two-sample test on a CSV dataset");
  add_common(test, args, false);
  test->add_option("--csv", args.csv_path, "dataset file (subject_id,group,time,value)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    json config = json::object();
    if (!args.config_path.empty()) config = load_config(args.config_path);
    if (args.seed.has_value()) config["seed"] = *args.seed;
    if (args.draws.has_value()) config["draws"] = *args.draws;
    if (args.replications.has_value()) config["replications"] = *args.replications;

    ordered_json report;
    if (power->parsed()) {
      report = fdapower::cli::run_power(config);
    } else if (samplesize->parsed()) {
      report = fdapower::cli::run_samplesize(config);
    } else if (validate->parsed()) {
      report = fdapower::cli::run_validate(config);
    } else {
      if (!args.csv_path.empty()) config["csv"] = args.csv_path;
      report = fdapower::cli::run_test(config);
    }
    emit(report, args);
    return 0;
  } catch (const fdapower::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
