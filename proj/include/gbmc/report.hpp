#pragma once

// JSON and CSV renderings of results. Key order is fixed and floats are printed
// with 17 significant digits, so equal results give byte-identical files.

#include <string>
#include <vector>

#include "json.hpp"

#include "gbmc/config.hpp"
#include "gbmc/estimator.hpp"
#include "gbmc/experiments.hpp"

namespace gbmc {

using Json = nlohmann::ordered_json;

std::string artifact_version();

// Two-space indented JSON with a trailing newline; non-finite numbers become null.
std::string render_json(const Json& j);
// Header t,value,stderr,analytic,ratio and one line per row.
std::string render_csv(const std::vector<LimitRow>& rows);

Json to_json(const EstimateReport& r, bool wall_time = false);
Json to_json(const LimitTable& t);
Json to_json(const ConstantTable& c);
Json to_json(const CancellationSuite& s);
Json to_json(const DiagnosticsReport& d);
Json config_json(const RunConfig& c);

// Report envelope: artifact, version, config hash, experiment, config echo, status, result.
Json report_envelope(const RunConfig& c, Json result);

enum class ErrorKind { Validation, Numerical };
inline int exit_code(ErrorKind k) { return k == ErrorKind::Validation ? 2 : 3; }
// `config` may be null when the configuration itself failed to load.
Json error_report(ErrorKind kind, const std::string& message, const std::string& key = "",
                  const RunConfig* config = nullptr);

// Writes `text` to dir/name, creating dir. Throws std::runtime_error when unwritable.
std::string write_text(const std::string& dir, const std::string& name, const std::string& text);

}  // namespace gbmc
