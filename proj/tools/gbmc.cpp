// gbmc: command-line driver for the Gauss-Bonnet Monte Carlo experiments.
//
//   gbmc run <config>
//   gbmc estimate-chi [config] [--set key=value ...]
//   gbmc local-limit | calibrate | cancellation-suite | diagnostics [config] [--set key=value ...]
//   gbmc info
//
// Exit codes: 0 success, 2 invalid configuration, 3 numerical abort. Reports go
// to files; stdout carries one JSON line (summary or error); progress goes to stderr.

#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "gbmc/driver.hpp"
#include "gbmc/errors.hpp"
#include "gbmc/estimator.hpp"

namespace {

using gbmc::ErrorKind;
using gbmc::Json;

int fail(ErrorKind kind, const std::string& message, const std::string& key, const gbmc::RunConfig* config) {
  const Json err = gbmc::error_report(kind, message, key, config);
  std::cerr << "gbmc: error: " << message << "\n";
  if (config) {
    try {
      gbmc::write_text(gbmc::output_directory(*config), "error.json", gbmc::render_json(err));
    } catch (const std::exception&) {
    }
  }
  std::cout << err.dump() << std::endl;
  return gbmc::exit_code(kind);
}

gbmc::RawConfig parse_overrides(const std::vector<std::string>& sets) {
  gbmc::RawConfig out;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw gbmc::ValidationError("--set expects key=value, got '" + s + "'");
    out[s.substr(0, eq)] = s.substr(eq + 1);
  }
  return out;
}

int run(const std::string& path, const std::vector<std::string>& sets, std::optional<gbmc::Experiment> experiment,
        bool quiet) {
  std::optional<gbmc::RunConfig> config;
  try {
    const auto overrides = parse_overrides(sets);
    config = path.empty() ? gbmc::build_config(overrides, experiment)
                          : gbmc::load_config(path, overrides, experiment);
  } catch (const gbmc::ConfigError& e) {
    return fail(ErrorKind::Validation, e.what(), e.key(), nullptr);
  } catch (const gbmc::ValidationError& e) {
    return fail(ErrorKind::Validation, e.what(), "", nullptr);
  }

  const gbmc::Progress progress = [quiet](const std::string& msg) {
    if (!quiet) std::cerr << "gbmc: " << msg << std::endl;
  };
  gbmc::RunResult result;
  try {
    result = gbmc::execute(*config, progress);
  } catch (const gbmc::ConfigError& e) {
    return fail(ErrorKind::Validation, e.what(), e.key(), &*config);
  } catch (const gbmc::ValidationError& e) {
    return fail(ErrorKind::Validation, e.what(), "", &*config);
  } catch (const gbmc::NumericalError& e) {
    return fail(ErrorKind::Numerical, e.what(), "", &*config);
  }

  try {
    const auto paths = gbmc::write_outputs(*config, result);
    result.summary["outputs"] = paths;
  } catch (const std::runtime_error& e) {
    return fail(ErrorKind::Validation, e.what(), "output_dir", &*config);
  }
  std::cout << result.summary.dump() << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo verification of Gauss-Bonnet for manifolds with boundary"};
  app.set_version_flag("--version", gbmc::artifact_version());
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress progress messages on stderr");

  std::string run_path;
  auto* run_cmd = app.add_subcommand("run", "Run the experiment named by the config's 'experiment' key");
  run_cmd->add_option("config", run_path, "Config file (key = value lines)")->required();
  std::vector<std::string> run_sets;
  run_cmd->add_option("--set", run_sets, "Override a config key (key=value)");

  struct Sub {
    gbmc::Experiment experiment;
    CLI::App* cmd;
    std::string path;
    std::vector<std::string> sets;
  };
  const std::vector<std::pair<gbmc::Experiment, std::string>> descriptions = {
      {gbmc::Experiment::EstimateChi, "Path-integral estimate of the Euler characteristic"},
      {gbmc::Experiment::LocalLimit, "Small-t convergence table of the local integrands"},
      {gbmc::Experiment::Calibrate, "Least-squares calibration of the universal constants"},
      {gbmc::Experiment::CancellationSuite, "Vanishing of low-degree supertraces"},
      {gbmc::Experiment::Diagnostics, "Stochastic property checks of the path simulation"},
  };
  std::vector<Sub> subs;
  subs.reserve(descriptions.size());
  for (const auto& [e, text] : descriptions) {
    subs.push_back({e, app.add_subcommand(gbmc::experiment_name(e), text), "", {}});
    Sub& s = subs.back();
    s.cmd->add_option("config", s.path, "Config file (key = value lines); optional with --set");
    s.cmd->add_option("--set", s.sets, "Set a config key (key=value)");
  }

  auto* info_cmd = app.add_subcommand("info", "Version, model catalog and experiment names as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(ErrorKind::Validation, e.what(), "", nullptr);
  }

  if (run_cmd->parsed()) return run(run_path, run_sets, std::nullopt, quiet);
  for (const auto& s : subs)
    if (s.cmd->parsed()) return run(s.path, s.sets, s.experiment, quiet);
  if (info_cmd->parsed()) {
    Json j;
    j["artifact"] = "gbmc";
    j["version"] = gbmc::artifact_version();
    j["models"] = gbmc::geometry::catalog_names();
    j["experiments"] = gbmc::experiment_names();
    j["spectral_note"] = gbmc::mckean_singer_note();
    std::cout << j.dump() << std::endl;
  }
  return 0;
}
