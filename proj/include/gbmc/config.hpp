#pragma once

// Run configuration read from a `key = value` text file. Lines starting with
// '#' are comments; list values are comma separated; model parameters use the
// prefix "model." (model.dimension = 3). Unknown and duplicate keys are errors.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gbmc/errors.hpp"
#include "gbmc/geometry.hpp"

namespace gbmc {

enum class Experiment { EstimateChi, LocalLimit, Calibrate, CancellationSuite, Diagnostics };

std::string experiment_name(Experiment e);
Experiment parse_experiment(const std::string& name);
std::vector<std::string> experiment_names();

// Thrown for a configuration problem tied to one key; what() names the key.
class ConfigError : public ValidationError {
 public:
  ConfigError(std::string key, const std::string& message) : ValidationError(message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct RunConfig {
  Experiment experiment = Experiment::EstimateChi;
  std::uint64_t seed = 0;
  std::string output_dir = "gbmc-out";
  std::vector<std::string> formats;  // "json", "csv"
  int workers = 0;
  bool wall_time = false;

  std::string model;
  geometry::ModelParameters model_params;

  std::vector<double> ts;
  long base_points = 0;
  int bridges = 1;
  int steps = 64;
  std::string functional = "exact";  // or "epsilon"
  double epsilon = 1e-3;
  std::string kernel = "weighted";  // or "analytic"
  bool stratified = true;
  double collar_factor = 3.0;

  int samples = 0;
  std::string point = "boundary";  // local-limit: "interior" or "boundary"

  std::vector<int> dimensions = {2, 3, 4};  // calibrate

  int instances = 100;  // cancellation-suite
  double tolerance = 1e-10;

  // Every key of the experiment with its effective value, sorted by key.
  std::map<std::string, std::string> echo() const;
};

using RawConfig = std::map<std::string, std::string>;

RawConfig parse_key_values(const std::string& text);
// Applies defaults and validates every key. The experiment comes from the
// "experiment" key unless `experiment` is given, in which case a conflicting
// key is an error.
RunConfig build_config(const RawConfig& raw, std::optional<Experiment> experiment = std::nullopt);
RunConfig load_config(const std::string& path, const RawConfig& overrides = {},
                      std::optional<Experiment> experiment = std::nullopt);

// FNV-1a over the canonical echo, as 16 hex digits.
std::string config_hash(const RunConfig& config);

}  // namespace gbmc
