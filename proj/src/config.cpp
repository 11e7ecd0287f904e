#include "gbmc/config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace gbmc {

namespace {

const std::vector<std::pair<Experiment, std::string>> kNames = {
    {Experiment::EstimateChi, "estimate-chi"},
    {Experiment::LocalLimit, "local-limit"},
    {Experiment::Calibrate, "calibrate"},
    {Experiment::CancellationSuite, "cancellation-suite"},
    {Experiment::Diagnostics, "diagnostics"},
};

const std::set<std::string> kCommon = {"experiment", "seed", "output_dir", "formats", "workers", "wall_time"};

std::set<std::string> allowed_keys(Experiment e) {
  std::set<std::string> keys = kCommon;
  switch (e) {
    case Experiment::EstimateChi:
      keys.insert({"model", "t", "base_points", "bridges", "steps", "functional", "epsilon", "kernel", "stratified",
                   "collar_factor"});
      break;
    case Experiment::LocalLimit:
      keys.insert({"model", "t", "samples", "point", "steps", "functional", "epsilon", "collar_factor"});
      break;
    case Experiment::Calibrate:
      keys.insert("dimensions");
      break;
    case Experiment::CancellationSuite:
      keys.insert({"instances", "tolerance"});
      break;
    case Experiment::Diagnostics:
      keys.insert({"samples", "steps"});
      break;
  }
  return keys;
}

std::vector<std::string> required_keys(Experiment e) {
  switch (e) {
    case Experiment::EstimateChi:
      return {"seed", "model", "t", "base_points", "bridges"};
    case Experiment::LocalLimit:
      return {"seed", "model", "t", "samples"};
    default:
      return {"seed"};
  }
}

bool has_model_keys(Experiment e) { return e == Experiment::EstimateChi || e == Experiment::LocalLimit; }

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split_list(const std::string& key, const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError(key, "empty list entry in '" + key + "'");
    out.push_back(item);
  }
  if (out.empty()) throw ConfigError(key, "'" + key + "' must not be empty");
  return out;
}

double to_real(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (value.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(v))
    throw ConfigError(key, "'" + key + "' expects a finite number, got '" + value + "'");
  return v;
}

long long to_integer(const std::string& key, const std::string& value, long long lo, long long hi) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(value.c_str(), &end, 10);
  if (value.empty() || *end != '\0' || errno == ERANGE)
    throw ConfigError(key, "'" + key + "' expects an integer, got '" + value + "'");
  if (v < lo || v > hi)
    throw ConfigError(key, "'" + key + "' must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return v;
}

std::uint64_t to_seed(const std::string& value) {
  errno = 0;
  char* end = nullptr;
  if (value.empty() || value[0] == '-') throw ConfigError("seed", "'seed' expects a non-negative integer");
  const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (*end != '\0' || errno == ERANGE) throw ConfigError("seed", "'seed' expects a non-negative integer");
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError(key, "'" + key + "' expects true or false, got '" + value + "'");
}

std::string choice(const std::string& key, const std::string& value, const std::set<std::string>& options) {
  if (options.count(value)) return value;
  std::string all;
  for (const auto& o : options) all += (all.empty() ? "" : ", ") + o;
  throw ConfigError(key, "'" + key + "' must be one of " + all + ", got '" + value + "'");
}

std::string real_text(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T, class F>
std::string join(const std::vector<T>& xs, F f) {
  std::string out;
  for (const auto& x : xs) out += (out.empty() ? "" : ",") + f(x);
  return out;
}

}  // namespace

std::string experiment_name(Experiment e) {
  for (const auto& [k, name] : kNames)
    if (k == e) return name;
  return "?";
}

Experiment parse_experiment(const std::string& name) {
  for (const auto& [k, n] : kNames)
    if (n == name) return k;
  throw ConfigError("experiment", "unknown experiment '" + name + "'");
}

std::vector<std::string> experiment_names() {
  std::vector<std::string> out;
  for (const auto& kv : kNames) out.push_back(kv.second);
  return out;
}

RawConfig parse_key_values(const std::string& text) {
  RawConfig raw;
  std::stringstream ss(text);
  std::string line;
  int number = 0;
  while (std::getline(ss, line)) {
    ++number;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ValidationError("line " + std::to_string(number) + ": expected 'key = value'");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) throw ValidationError("line " + std::to_string(number) + ": empty key");
    if (!raw.emplace(key, value).second) throw ConfigError(key, "duplicate key '" + key + "'");
  }
  return raw;
}

RunConfig build_config(const RawConfig& raw, std::optional<Experiment> experiment) {
  RunConfig c;
  const auto it = raw.find("experiment");
  if (experiment) {
    if (it != raw.end() && parse_experiment(it->second) != *experiment)
      throw ConfigError("experiment", "config declares experiment '" + it->second + "' but '" +
                                          experiment_name(*experiment) + "' was requested");
    c.experiment = *experiment;
  } else {
    if (it == raw.end()) throw ConfigError("experiment", "missing required key 'experiment'");
    c.experiment = parse_experiment(it->second);
  }

  const auto allowed = allowed_keys(c.experiment);
  for (const auto& [key, value] : raw) {
    if (key.rfind("model.", 0) == 0 && has_model_keys(c.experiment)) continue;
    if (!allowed.count(key))
      throw ConfigError(key, "unknown key '" + key + "' for experiment " + experiment_name(c.experiment));
  }
  for (const auto& key : required_keys(c.experiment))
    if (!raw.count(key)) throw ConfigError(key, "missing required key '" + key + "'");

  auto get = [&](const std::string& key) -> const std::string* {
    const auto f = raw.find(key);
    return f == raw.end() ? nullptr : &f->second;
  };

  c.seed = to_seed(*get("seed"));
  if (auto v = get("output_dir")) {
    if (v->empty()) throw ConfigError("output_dir", "'output_dir' must not be empty");
    c.output_dir = *v;
  }
  c.formats = c.experiment == Experiment::EstimateChi || c.experiment == Experiment::LocalLimit
                  ? std::vector<std::string>{"json", "csv"}
                  : std::vector<std::string>{"json"};
  if (auto v = get("formats")) {
    c.formats.clear();
    for (const auto& f : split_list("formats", *v)) {
      choice("formats", f, {"json", "csv"});
      if (f == "csv" && (c.experiment != Experiment::EstimateChi && c.experiment != Experiment::LocalLimit))
        throw ConfigError("formats", "csv output is only available for estimate-chi and local-limit");
      if (std::find(c.formats.begin(), c.formats.end(), f) == c.formats.end()) c.formats.push_back(f);
    }
  }
  if (auto v = get("workers")) c.workers = static_cast<int>(to_integer("workers", *v, 0, 4096));
  if (auto v = get("wall_time")) c.wall_time = to_bool("wall_time", *v);

  if (has_model_keys(c.experiment)) {
    c.model = *get("model");
    for (const auto& [key, value] : raw)
      if (key.rfind("model.", 0) == 0) c.model_params[key.substr(6)] = to_real(key, value);
    try {
      geometry::model_catalog(c.model, c.model_params);
    } catch (const ValidationError& e) {
      throw ConfigError("model", e.what());
    }
    for (const auto& s : split_list("t", *get("t"))) {
      const double t = to_real("t", s);
      if (!(t > 0.0)) throw ConfigError("t", "'t' must be positive");
      c.ts.push_back(t);
    }
    if (auto v = get("steps")) c.steps = static_cast<int>(to_integer("steps", *v, 1, 1 << 20));
    if (auto v = get("functional")) c.functional = choice("functional", *v, {"exact", "epsilon"});
    if (auto v = get("epsilon")) {
      c.epsilon = to_real("epsilon", *v);
      if (!(c.epsilon > 0.0)) throw ConfigError("epsilon", "'epsilon' must be positive");
    }
    if (auto v = get("collar_factor")) {
      c.collar_factor = to_real("collar_factor", *v);
      if (!(c.collar_factor > 0.0)) throw ConfigError("collar_factor", "'collar_factor' must be positive");
    }
  }

  switch (c.experiment) {
    case Experiment::EstimateChi:
      c.base_points = static_cast<long>(to_integer("base_points", *get("base_points"), 2, 1'000'000'000));
      c.bridges = static_cast<int>(to_integer("bridges", *get("bridges"), 1, 100'000'000));
      if (auto v = get("kernel")) c.kernel = choice("kernel", *v, {"weighted", "analytic"});
      if (auto v = get("stratified")) c.stratified = to_bool("stratified", *v);
      break;
    case Experiment::LocalLimit:
      c.samples = static_cast<int>(to_integer("samples", *get("samples"), 2, 1'000'000'000));
      if (auto v = get("point")) c.point = choice("point", *v, {"interior", "boundary"});
      break;
    case Experiment::Calibrate:
      if (auto v = get("dimensions")) {
        c.dimensions.clear();
        for (const auto& s : split_list("dimensions", *v))
          c.dimensions.push_back(static_cast<int>(to_integer("dimensions", s, 2, 6)));
        std::sort(c.dimensions.begin(), c.dimensions.end());
        c.dimensions.erase(std::unique(c.dimensions.begin(), c.dimensions.end()), c.dimensions.end());
      }
      break;
    case Experiment::CancellationSuite:
      if (auto v = get("instances")) c.instances = static_cast<int>(to_integer("instances", *v, 1, 1'000'000));
      if (auto v = get("tolerance")) {
        c.tolerance = to_real("tolerance", *v);
        if (!(c.tolerance > 0.0)) throw ConfigError("tolerance", "'tolerance' must be positive");
      }
      break;
    case Experiment::Diagnostics:
      c.samples = 2000;
      if (auto v = get("samples")) c.samples = static_cast<int>(to_integer("samples", *v, 10, 100'000'000));
      if (auto v = get("steps")) c.steps = static_cast<int>(to_integer("steps", *v, 1, 1 << 20));
      break;
  }
  return c;
}

RunConfig load_config(const std::string& path, const RawConfig& overrides, std::optional<Experiment> experiment) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  RawConfig raw = parse_key_values(ss.str());
  for (const auto& [k, v] : overrides) raw[k] = v;
  return build_config(raw, experiment);
}

std::map<std::string, std::string> RunConfig::echo() const {
  std::map<std::string, std::string> e;
  e["experiment"] = experiment_name(experiment);
  e["seed"] = std::to_string(seed);
  e["output_dir"] = output_dir;
  e["formats"] = join(formats, [](const std::string& s) { return s; });
  e["workers"] = std::to_string(workers);
  e["wall_time"] = wall_time ? "true" : "false";
  if (has_model_keys(experiment)) {
    e["model"] = model;
    for (const auto& [k, v] : model_params) e["model." + k] = real_text(v);
    e["t"] = join(ts, real_text);
    e["steps"] = std::to_string(steps);
    e["functional"] = functional;
    e["epsilon"] = real_text(epsilon);
    e["collar_factor"] = real_text(collar_factor);
  }
  switch (experiment) {
    case Experiment::EstimateChi:
      e["base_points"] = std::to_string(base_points);
      e["bridges"] = std::to_string(bridges);
      e["kernel"] = kernel;
      e["stratified"] = stratified ? "true" : "false";
      break;
    case Experiment::LocalLimit:
      e["samples"] = std::to_string(samples);
      e["point"] = point;
      break;
    case Experiment::Calibrate:
      e["dimensions"] = join(dimensions, [](int d) { return std::to_string(d); });
      break;
    case Experiment::CancellationSuite:
      e["instances"] = std::to_string(instances);
      e["tolerance"] = real_text(tolerance);
      break;
    case Experiment::Diagnostics:
      e["samples"] = std::to_string(samples);
      e["steps"] = std::to_string(steps);
      break;
  }
  return e;
}

std::string config_hash(const RunConfig& config) {
  std::uint64_t h = 14695981039346656037ull;
  auto feed = [&](const std::string& s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 1099511628211ull;
    }
  };
  for (const auto& [k, v] : config.echo()) {
    feed(k);
    feed("=");
    feed(v);
    feed("\n");
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace gbmc
