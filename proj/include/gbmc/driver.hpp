#pragma once

// Runs one configured experiment and writes its report files.

#include <functional>
#include <string>
#include <vector>

#include "gbmc/config.hpp"
#include "gbmc/report.hpp"

namespace gbmc {

struct RunResult {
  Json report;                  // full envelope
  std::vector<LimitRow> table;  // CSV rows (estimate-chi, local-limit)
  Json summary;                 // one-line stdout summary
};

using Progress = std::function<void(const std::string&)>;

// Throws ValidationError or NumericalError.
RunResult execute(const RunConfig& config, const Progress& progress = {});

// GBMC_OUTPUT_DIR when set, else the configured directory.
std::string output_directory(const RunConfig& config);

// Writes <experiment>.json and, when requested, <experiment>.csv.
std::vector<std::string> write_outputs(const RunConfig& config, const RunResult& result);

}  // namespace gbmc
