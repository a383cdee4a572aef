#pragma once

#include <istream>
#include <string>

#include "json.hpp"

#include "fdapower/process.hpp"

namespace fdapower::cli {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// Subcommand drivers. Each validates its configuration exhaustively
// (unknown keys are a ConfigError) and returns the full report.
ordered_json run_power(const json& config);
ordered_json run_samplesize(const json& config);
ordered_json run_validate(const json& config);
ordered_json run_test(const json& config);

// RFC 4180 rendering of a report produced by the matching driver.
std::string report_to_csv(const ordered_json& report);

struct CsvDataset {
  SparseDataset data;
  double time_min = 0.0;
  double time_max = 1.0;
};

// Parse `subject_id,group,time,value` rows; times are affinely rescaled
// onto [0, 1]. Malformed content raises ConfigError with a line number.
CsvDataset read_dataset_csv(std::istream& in);

}  // namespace fdapower::cli
