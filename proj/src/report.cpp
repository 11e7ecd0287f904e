#include "gbmc/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace gbmc {

namespace {

std::string real_text(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  // keep a float a float when read back
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

void render(const Json& j, int indent, std::string& out) {
  const std::string pad(2 * (indent + 1), ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + Json(it.key()).dump() + ": ";
        render(it.value(), indent + 1, out);
      }
      out += "\n" + std::string(2 * indent, ' ') + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ",\n";
        first = false;
        out += pad;
        render(v, indent + 1, out);
      }
      out += "\n" + std::string(2 * indent, ' ') + "]";
      return;
    }
    case Json::value_t::number_float:
      out += real_text(j.get<double>());
      return;
    default:
      out += j.dump();
  }
}

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json vector_json(const exterior::Vector& v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

std::string artifact_version() { return GBMC_VERSION; }

std::string render_json(const Json& j) {
  std::string out;
  render(j, 0, out);
  out += "\n";
  return out;
}

std::string render_csv(const std::vector<LimitRow>& rows) {
  auto cell = [](double v) { return std::isfinite(v) ? real_text(v) : std::string("nan"); };
  std::string out = "t,value,stderr,analytic,ratio\n";
  for (const auto& r : rows)
    out += cell(r.t) + "," + cell(r.value) + "," + cell(r.standard_error) + "," + cell(r.analytic) + "," +
           cell(r.ratio) + "\n";
  return out;
}

Json to_json(const EstimateReport& r, bool wall_time) {
  Json j;
  j["model"] = r.model;
  j["dimension"] = r.dimension;
  j["t"] = r.t;
  j["steps"] = r.steps;
  j["base_points"] = r.base_points;
  j["bridges_per_point"] = r.bridges_per_point;
  j["estimate"] = r.estimate;
  j["standard_error"] = r.standard_error;
  j["interval"] = {r.interval_low, r.interval_high};
  j["reference"] = r.reference;
  j["covers_reference"] = r.covers_reference();
  j["collar_width"] = r.collar_width;
  Json strata = Json::array();
  for (const auto& s : r.strata)
    strata.push_back(Json{{"name", s.name}, {"points", s.points}, {"mean", s.mean}, {"standard_error", s.standard_error}});
  j["strata"] = strata;
  j["degree0_mean"] = r.degree0_mean;
  j["invalid"] = r.invalid;
  j["invalid_rate"] = r.invalid_rate;
  j["window"] = {{"min", r.window.min}, {"max", r.window.max}};
  j["in_window"] = r.in_window;
  j["kernel"] = r.kernel;
  j["functional"] = r.functional;
  j["seed"] = r.seed;
  if (wall_time) j["wall_time_seconds"] = r.wall_time;
  return j;
}

Json to_json(const LimitTable& t) {
  Json j;
  j["model"] = t.model;
  j["kind"] = t.kind;
  j["point"] = vector_json(t.point);
  Json rows = Json::array();
  for (const auto& r : t.rows)
    rows.push_back(Json{{"t", r.t},
                        {"value", r.value},
                        {"stderr", r.standard_error},
                        {"analytic", r.analytic},
                        {"ratio", finite_or_null(r.ratio)}});
  j["rows"] = rows;
  j["observed_order"] = finite_or_null(t.observed_order);
  return j;
}

Json to_json(const ConstantTable& c) {
  Json j;
  Json bulk = Json::object(), boundary = Json::object(), odd = Json::object(), ratio = Json::object(),
       pf = Json::object();
  for (const auto& [n, v] : c.bulk) bulk["b_" + std::to_string(n)] = v;
  for (const auto& [key, v] : c.boundary) {
    const auto [n, k, l] = key;
    boundary["b_{" + std::to_string(n) + "," + std::to_string(k) + "," + std::to_string(l) + "}"] = v;
  }
  for (const auto& [n, v] : c.odd) odd["d_" + std::to_string(n)] = v;
  for (const auto& [n, v] : c.ratio) ratio["e_" + std::to_string(n)] = v;
  for (const auto& [n, v] : c.pfaffian) pf["c_" + std::to_string(n)] = v;
  j["bulk"] = bulk;
  j["boundary"] = boundary;
  j["odd"] = odd;
  j["ratio"] = ratio;
  j["pfaffian"] = pf;
  Json runs = Json::array();
  for (const auto& r : c.runs)
    runs.push_back(Json{{"dimension", r.dimension},
                        {"models", r.models},
                        {"unknowns", r.unknowns},
                        {"rank", r.rank},
                        {"max_residual", r.max_residual},
                        {"residuals", r.residuals}});
  j["runs"] = runs;
  return j;
}

Json to_json(const CancellationSuite& s) {
  Json j;
  j["tolerance"] = s.tolerance;
  Json cases = Json::array();
  for (const auto& c : s.cases)
    cases.push_back(Json{{"variant", c.variant},
                         {"n", c.n},
                         {"pairs", c.pairs},
                         {"derivations", c.derivations},
                         {"instances", c.instances},
                         {"failures", c.failures},
                         {"max_abs", c.max_abs}});
  j["cases"] = cases;
  j["total"] = s.total;
  j["failures"] = s.failures;
  j["max_abs"] = s.max_abs;
  j["summary"] = s.summary();
  return j;
}

Json to_json(const DiagnosticsReport& d) {
  Json j;
  Json checks = Json::array();
  for (const auto& c : d.checks) {
    Json series = Json::array();
    for (const auto& p : c.series)
      series.push_back(Json{{"x", p.x}, {"y", p.y}, {"standard_error", p.standard_error}});
    checks.push_back(Json{{"name", c.name},
                          {"description", c.description},
                          {"value", finite_or_null(c.value)},
                          {"target", c.target},
                          {"tolerance", c.tolerance},
                          {"passed", c.passed},
                          {"series", series}});
  }
  j["checks"] = checks;
  j["passed"] = d.passed();
  return j;
}

Json config_json(const RunConfig& c) {
  Json j = Json::object();
  for (const auto& [k, v] : c.echo()) j[k] = v;
  return j;
}

Json report_envelope(const RunConfig& c, Json result) {
  Json j;
  j["artifact"] = "gbmc";
  j["version"] = artifact_version();
  j["config_hash"] = config_hash(c);
  j["experiment"] = experiment_name(c.experiment);
  j["config"] = config_json(c);
  j["status"] = "ok";
  j["result"] = std::move(result);
  return j;
}

Json error_report(ErrorKind kind, const std::string& message, const std::string& key, const RunConfig* config) {
  Json j;
  j["artifact"] = "gbmc";
  j["version"] = artifact_version();
  if (config) {
    j["config_hash"] = config_hash(*config);
    j["experiment"] = experiment_name(config->experiment);
  }
  j["status"] = "error";
  j["error"] = {{"kind", kind == ErrorKind::Validation ? "validation" : "numerical"},
                {"message", message},
                {"key", key.empty() ? Json(nullptr) : Json(key)},
                {"exit_code", exit_code(kind)}};
  return j;
}

std::string write_text(const std::string& dir, const std::string& name, const std::string& text) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const std::filesystem::path path = std::filesystem::path(dir) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  out.close();
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return path.string();
}

}  // namespace gbmc
