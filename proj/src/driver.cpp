#include "gbmc/driver.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>

#include "gbmc/calibration.hpp"
#include "gbmc/errors.hpp"

namespace gbmc {

namespace {

EstimatorOptions estimator_options(const RunConfig& c) {
  EstimatorOptions o;
  o.steps = c.steps;
  o.mode = c.functional == "epsilon" ? stochastic::FunctionalMode::penalized(c.epsilon)
                                     : stochastic::FunctionalMode::exact();
  o.kernel = c.kernel == "analytic" ? KernelMode::Analytic : KernelMode::Weighted;
  o.stratified = c.stratified;
  o.collar_factor = c.collar_factor;
  o.workers = c.workers;
  return o;
}

void say(const Progress& p, const std::string& msg) {
  if (p) p(msg);
}

RunResult run_estimate(const RunConfig& c, const Progress& progress) {
  const auto model = geometry::model_catalog(c.model, c.model_params);
  const EstimatorOptions o = estimator_options(c);
  RunResult out;
  Json estimates = Json::array();
  std::vector<EstimateReport> reports;
  for (std::size_t k = 0; k < c.ts.size(); ++k) {
    say(progress, "estimate-chi " + c.model + ": t = " + std::to_string(c.ts[k]) + " (" + std::to_string(k + 1) +
                      "/" + std::to_string(c.ts.size()) + ")");
    const auto r = estimate_chi(model, c.ts[k], c.base_points, c.bridges, c.seed + k, o);
    estimates.push_back(to_json(r, c.wall_time));
    reports.push_back(r);
    LimitRow row{r.t, r.estimate, r.standard_error, r.reference,
                 r.reference != 0.0 ? r.estimate / r.reference : std::numeric_limits<double>::quiet_NaN()};
    out.table.push_back(row);
  }
  // largest disagreement between any two t, in combined standard errors
  double worst = 0.0;
  for (std::size_t a = 0; a < reports.size(); ++a)
    for (std::size_t b = a + 1; b < reports.size(); ++b) {
      const double se = std::hypot(reports[a].standard_error, reports[b].standard_error);
      const double d = std::abs(reports[a].estimate - reports[b].estimate);
      worst = std::max(worst, se > 0.0 ? d / se : (d > 0.0 ? HUGE_VAL : 0.0));
    }
  const auto& first = reports.front();
  Json result;
  result["model"] = first.model;
  result["dimension"] = first.dimension;
  result["reference"] = first.reference;
  result["estimate"] = first.estimate;
  result["standard_error"] = first.standard_error;
  result["estimates"] = estimates;
  result["t_agreement_z"] = worst;
  result["t_consistent"] = worst <= 1.96;
  out.report = report_envelope(c, result);
  out.summary = {{"experiment", "estimate-chi"},
                 {"model", first.model},
                 {"estimate", first.estimate},
                 {"standard_error", first.standard_error},
                 {"reference", first.reference},
                 {"covers_reference", first.covers_reference()}};
  return out;
}

ConstantTable constants_for(int n) {
  if (n < 2) throw ConfigError("model", "local limits need dimension >= 2");
  return calibrate_constants(n % 2 == 0 ? std::vector<int>{n} : std::vector<int>{n - 1, n});
}

RunResult run_local_limit(const RunConfig& c, const Progress& progress) {
  const auto model = geometry::model_catalog(c.model, c.model_params);
  if (c.point == "boundary" && !model.has_boundary())
    throw ConfigError("point", "model '" + c.model + "' has no boundary");
  const Vector x = c.point == "boundary" ? geometry::reference_boundary_point(model)
                                         : geometry::reference_interior_point(model);
  say(progress, "local-limit " + c.model + ": calibrating constants");
  const ConstantTable constants = constants_for(model.dimension());
  say(progress, "local-limit " + c.model + ": " + std::to_string(c.ts.size()) + " values of t");
  const LimitTable table = local_limit_check(model, x, c.ts, c.samples, c.seed, constants, estimator_options(c));
  RunResult out;
  out.table = table.rows;
  out.report = report_envelope(c, to_json(table));
  const auto& last = table.rows.back();
  out.summary = {{"experiment", "local-limit"},
                 {"model", table.model},
                 {"kind", table.kind},
                 {"t", last.t},
                 {"value", last.value},
                 {"analytic", last.analytic},
                 {"ratio", std::isfinite(last.ratio) ? Json(last.ratio) : Json(nullptr)}};
  return out;
}

RunResult run_calibrate(const RunConfig& c, const Progress& progress) {
  say(progress, "calibrate: fitting constants");
  const ConstantTable table = calibrate_constants(c.dimensions);
  RunResult out;
  out.report = report_envelope(c, to_json(table));
  double residual = 0.0;
  for (const auto& r : table.runs) residual = std::max(residual, r.max_residual);
  out.summary = {{"experiment", "calibrate"}, {"max_residual", residual}};
  for (const auto& [n, e] : table.ratio) out.summary["e_" + std::to_string(n)] = e;
  return out;
}

RunResult run_cancellation(const RunConfig& c, const Progress& progress) {
  say(progress, "cancellation-suite: " + std::to_string(c.instances) + " instances per case");
  const CancellationSuite suite = cancellation_suite(c.seed, c.instances, c.tolerance);
  RunResult out;
  out.report = report_envelope(c, to_json(suite));
  out.summary = {{"experiment", "cancellation-suite"},
                 {"total", suite.total},
                 {"max_abs", suite.max_abs},
                 {"summary", suite.summary()}};
  return out;
}

RunResult run_diagnostics(const RunConfig& c, const Progress& progress) {
  say(progress, "diagnostics: " + std::to_string(c.samples) + " samples per point");
  const DiagnosticsReport d = stochastic_diagnostics(c.seed, c.samples, c.steps);
  RunResult out;
  out.report = report_envelope(c, to_json(d));
  out.summary = {{"experiment", "diagnostics"}, {"passed", d.passed()}};
  for (const auto& check : d.checks) out.summary[check.name] = check.passed;
  return out;
}

}  // namespace

RunResult execute(const RunConfig& config, const Progress& progress) {
  const auto start = std::chrono::steady_clock::now();
  RunResult r;
  switch (config.experiment) {
    case Experiment::EstimateChi:
      r = run_estimate(config, progress);
      break;
    case Experiment::LocalLimit:
      r = run_local_limit(config, progress);
      break;
    case Experiment::Calibrate:
      r = run_calibrate(config, progress);
      break;
    case Experiment::CancellationSuite:
      r = run_cancellation(config, progress);
      break;
    case Experiment::Diagnostics:
      r = run_diagnostics(config, progress);
      break;
  }
  if (config.wall_time)
    r.report["wall_time_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.summary["status"] = "ok";
  r.summary["config_hash"] = config_hash(config);
  return r;
}

std::string output_directory(const RunConfig& config) {
  const char* env = std::getenv("GBMC_OUTPUT_DIR");
  return env && *env ? std::string(env) : config.output_dir;
}

std::vector<std::string> write_outputs(const RunConfig& config, const RunResult& result) {
  const std::string dir = output_directory(config);
  const std::string stem = experiment_name(config.experiment);
  std::vector<std::string> paths;
  for (const auto& f : config.formats) {
    if (f == "json") paths.push_back(write_text(dir, stem + ".json", render_json(result.report)));
    if (f == "csv") {
      std::string csv = "# gbmc " + artifact_version() + " config " + config_hash(config) + "\n";
      csv += render_csv(result.table);
      paths.push_back(write_text(dir, stem + ".csv", csv));
    }
  }
  return paths;
}

}  // namespace gbmc
