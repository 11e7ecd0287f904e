#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "gbmc/config.hpp"
#include "gbmc/report.hpp"

namespace fs = std::filesystem;
using gbmc::Json;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Outcome {
  int code = -1;
  std::string out;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("gbmc_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Outcome cli(const std::string& args, const std::string& out_dir = "out") {
    const fs::path stdout_file = dir_ / "stdout.txt";
    const std::string cmd = "GBMC_OUTPUT_DIR='" + (dir_ / out_dir).string() + "' '" GBMC_CLI_PATH "' -q " + args +
                            " > '" + stdout_file.string() + "' 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(stdout_file)};
  }

  fs::path write_config(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  fs::path dir_;
};

// Draft 2020-12 subset used by the shipped schema: $ref, oneOf, allOf,
// if/then, type, const, enum, required, properties, additionalProperties,
// items, prefixItems, minItems, maxItems, minimum, maximum, exclusiveMinimum, pattern.
class MiniValidator {
 public:
  explicit MiniValidator(Json root) : root_(std::move(root)) {}

  std::vector<std::string> validate(const Json& doc) const {
    std::vector<std::string> errors;
    check(root_, doc, "$", errors);
    return errors;
  }

 private:
  const Json& resolve(const std::string& ref) const {
    const std::string prefix = "#/$defs/";
    if (ref.rfind(prefix, 0) != 0) throw std::runtime_error("unsupported $ref " + ref);
    return root_.at("$defs").at(ref.substr(prefix.size()));
  }

  static bool has_type(const Json& v, const std::string& t) {
    if (t == "object") return v.is_object();
    if (t == "array") return v.is_array();
    if (t == "string") return v.is_string();
    if (t == "boolean") return v.is_boolean();
    if (t == "null") return v.is_null();
    if (t == "integer") return v.is_number_integer() || (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>());
    if (t == "number") return v.is_number();
    return false;
  }

  bool ok(const Json& schema, const Json& v) const {
    std::vector<std::string> e;
    check(schema, v, "", e);
    return e.empty();
  }

  void check(const Json& s, const Json& v, const std::string& at, std::vector<std::string>& err) const {
    if (s.contains("$ref")) check(resolve(s["$ref"]), v, at, err);
    if (s.contains("oneOf")) {
      int n = 0;
      for (const auto& sub : s["oneOf"]) n += ok(sub, v);
      if (n != 1) err.push_back(at + ": matches " + std::to_string(n) + " oneOf branches");
    }
    if (s.contains("allOf"))
      for (const auto& sub : s["allOf"]) check(sub, v, at, err);
    if (s.contains("if") && ok(s["if"], v) && s.contains("then")) check(s["then"], v, at, err);
    if (s.contains("type")) {
      bool any = false;
      if (s["type"].is_array()) {
        for (const auto& t : s["type"]) any = any || has_type(v, t);
      } else {
        any = has_type(v, s["type"]);
      }
      if (!any) {
        err.push_back(at + ": wrong type");
        return;
      }
    }
    if (s.contains("const") && v != s["const"]) err.push_back(at + ": const mismatch");
    if (s.contains("enum") && std::find(s["enum"].begin(), s["enum"].end(), v) == s["enum"].end())
      err.push_back(at + ": not in enum");
    if (v.is_number()) {
      const double x = v.get<double>();
      if (s.contains("minimum") && x < s["minimum"].get<double>()) err.push_back(at + ": below minimum");
      if (s.contains("maximum") && x > s["maximum"].get<double>()) err.push_back(at + ": above maximum");
      if (s.contains("exclusiveMinimum") && x <= s["exclusiveMinimum"].get<double>())
        err.push_back(at + ": not above exclusiveMinimum");
    }
    if (v.is_string() && s.contains("pattern") &&
        !std::regex_search(v.get<std::string>(), std::regex(s["pattern"].get<std::string>())))
      err.push_back(at + ": pattern mismatch");
    if (v.is_object()) {
      if (s.contains("required"))
        for (const auto& k : s["required"])
          if (!v.contains(k.get<std::string>())) err.push_back(at + ": missing " + k.get<std::string>());
      for (auto it = v.begin(); it != v.end(); ++it) {
        const std::string child = at + "." + it.key();
        if (s.contains("properties") && s["properties"].contains(it.key())) {
          check(s["properties"][it.key()], it.value(), child, err);
        } else if (s.contains("additionalProperties")) {
          const Json& ap = s["additionalProperties"];
          if (ap.is_boolean()) {
            if (!ap.get<bool>()) err.push_back(child + ": not allowed");
          } else {
            check(ap, it.value(), child, err);
          }
        }
      }
    }
    if (v.is_array()) {
      if (s.contains("minItems") && v.size() < s["minItems"].get<std::size_t>()) err.push_back(at + ": too short");
      if (s.contains("maxItems") && v.size() > s["maxItems"].get<std::size_t>()) err.push_back(at + ": too long");
      std::size_t first = 0;
      if (s.contains("prefixItems")) {
        for (std::size_t i = 0; i < s["prefixItems"].size() && i < v.size(); ++i)
          check(s["prefixItems"][i], v[i], at + "[" + std::to_string(i) + "]", err);
        first = s["prefixItems"].size();
      }
      if (s.contains("items"))
        for (std::size_t i = first; i < v.size(); ++i) check(s["items"], v[i], at + "[" + std::to_string(i) + "]", err);
    }
  }

  Json root_;
};

const MiniValidator& schema() {
  static const MiniValidator v(Json::parse(slurp(GBMC_SCHEMA_PATH)));
  return v;
}

std::string first_line_after_comments(const std::string& csv) {
  std::stringstream ss(csv);
  std::string line;
  while (std::getline(ss, line))
    if (!line.empty() && line[0] != '#') return line;
  return "";
}

const char* kDiskConfig =
    "# flat unit disk\n"
    "experiment = estimate-chi\n"
    "model = ball\n"
    "model.dimension = 2\n"
    "t = 0.05\n"
    "base_points = 400\n"
    "bridges = 1\n"
    "seed = 42\n";

}  // namespace

TEST(Config, ParsesCommentsListsAndModelKeys) {
  const auto raw = gbmc::parse_key_values("# c\n\nexperiment = local-limit\n model = cap \nmodel.aperture=1.2\n"
                                          "t = 0.04, 0.02,0.01\nsamples = 10\nseed = 3\n");
  const auto c = gbmc::build_config(raw);
  EXPECT_EQ(c.experiment, gbmc::Experiment::LocalLimit);
  EXPECT_EQ(c.model, "cap");
  EXPECT_DOUBLE_EQ(c.model_params.at("aperture"), 1.2);
  EXPECT_EQ(c.ts, (std::vector<double>{0.04, 0.02, 0.01}));
  EXPECT_EQ(c.samples, 10);
  EXPECT_EQ(c.seed, 3u);
  EXPECT_EQ(c.point, "boundary");
}

TEST(Config, RejectsDuplicateUnknownAndMalformedKeys) {
  try {
    gbmc::parse_key_values("seed = 1\nseed = 2\n");
    FAIL();
  } catch (const gbmc::ConfigError& e) {
    EXPECT_EQ(e.key(), "seed");
  }
  auto key_of = [](const std::string& text) {
    try {
      gbmc::build_config(gbmc::parse_key_values(text));
    } catch (const gbmc::ConfigError& e) {
      return e.key();
    }
    return std::string("<none>");
  };
  EXPECT_EQ(key_of("experiment = calibrate\nseed = 1\nsteps = 5\n"), "steps");
  EXPECT_EQ(key_of("experiment = calibrate\nseed = 1\nmodel.dimension = 2\n"), "model.dimension");
  EXPECT_EQ(key_of("experiment = estimate-chi\nmodel = ball\nt = 0.1\nbase_points = 10\nbridges = 1\n"), "seed");
  EXPECT_EQ(key_of("experiment = estimate-chi\nseed = 1\nmodel = ball\nt = -1\nbase_points = 10\nbridges = 1\n"), "t");
  EXPECT_EQ(key_of("experiment = estimate-chi\nseed = x\nmodel = ball\nt = 1\nbase_points = 10\nbridges = 1\n"), "seed");
  EXPECT_EQ(key_of("experiment = estimate-chi\nseed = 1\nmodel = torus\nt = 1\nbase_points = 10\nbridges = 1\n"), "model");
  EXPECT_EQ(key_of("experiment = nothing\nseed = 1\n"), "experiment");
  EXPECT_EQ(key_of("seed = 1\n"), "experiment");
  EXPECT_THROW(gbmc::parse_key_values("just text\n"), gbmc::ValidationError);
}

TEST(Config, HashFollowsEffectiveValuesOnly) {
  const auto a = gbmc::build_config(gbmc::parse_key_values(kDiskConfig));
  const auto reordered = gbmc::build_config(gbmc::parse_key_values(
      "seed = 42\nbridges = 1\nbase_points = 400\nt = 0.050\nmodel.dimension = 2.0\nmodel = ball\n"
      "experiment = estimate-chi\nsteps = 64\n"));
  EXPECT_EQ(gbmc::config_hash(a), gbmc::config_hash(reordered));
  auto raw = gbmc::parse_key_values(kDiskConfig);
  raw["seed"] = "43";
  EXPECT_NE(gbmc::config_hash(a), gbmc::config_hash(gbmc::build_config(raw)));
  EXPECT_EQ(gbmc::config_hash(a).size(), 16u);
}

TEST(Render, SeventeenSignificantDigitsAndNullForNonFinite) {
  Json j;
  j["a"] = 0.1;
  j["b"] = 1.0;
  j["c"] = std::nan("");
  j["d"] = 7;
  const std::string s = gbmc::render_json(j);
  EXPECT_NE(s.find("\"a\": 0.10000000000000001"), std::string::npos) << s;
  EXPECT_NE(s.find("\"b\": 1.0"), std::string::npos) << s;
  EXPECT_NE(s.find("\"c\": null"), std::string::npos) << s;
  EXPECT_NE(s.find("\"d\": 7"), std::string::npos) << s;
  EXPECT_DOUBLE_EQ(Json::parse(s)["a"].get<double>(), 0.1);
}

TEST(Render, CsvColumnsAreFixed) {
  const std::string csv = gbmc::render_csv({{0.01, 0.5, 0.01, 0.5, 1.0}});
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,value,stderr,analytic,ratio");
}

TEST_F(CliTest, MissingSeedExitsTwoAndNamesKey) {
  const auto cfg = write_config("bad.cfg", "experiment = estimate-chi\nmodel = ball\nt = 0.05\nbase_points = 10\n"
                                           "bridges = 1\n");
  const Outcome o = cli("run '" + cfg.string() + "'");
  EXPECT_EQ(o.code, 2);
  const Json err = Json::parse(o.out);
  EXPECT_EQ(err["error"]["key"], "seed");
  EXPECT_NE(err["error"]["message"].get<std::string>().find("seed"), std::string::npos);
  EXPECT_TRUE(schema().validate(err).empty());
}

TEST_F(CliTest, UnknownKeyAndBadUsageExitTwo) {
  EXPECT_EQ(cli("calibrate --set seed=1 --set bridges=3").code, 2);
  EXPECT_EQ(cli("no-such-command").code, 2);
  EXPECT_EQ(cli("run '" + (dir_ / "missing.cfg").string() + "'").code, 2);
}

TEST_F(CliTest, SeriesDivergenceExitsThreeWithErrorJson) {
  const Outcome o = cli("estimate-chi --set seed=1 --set model=ball --set t=1e-9 --set base_points=4 --set bridges=1 "
                        "--set kernel=analytic");
  EXPECT_EQ(o.code, 3);
  const Json err = Json::parse(o.out);
  EXPECT_EQ(err["error"]["kind"], "numerical");
  const Json written = Json::parse(slurp(dir_ / "out" / "error.json"));
  EXPECT_EQ(written, err);
  EXPECT_TRUE(schema().validate(written).empty());
}

TEST_F(CliTest, CancellationSuiteReportsZeroFailures) {
  const Outcome o = cli("cancellation-suite --set seed=9");
  ASSERT_EQ(o.code, 0);
  EXPECT_EQ(Json::parse(o.out)["summary"], "0 failures");
  const Json report = Json::parse(slurp(dir_ / "out" / "cancellation-suite.json"));
  EXPECT_EQ(report["result"]["failures"], 0);
  EXPECT_TRUE(schema().validate(report).empty());
}

TEST_F(CliTest, EstimateChiReportIsValidAndByteIdentical) {
  const auto cfg = write_config("disk.cfg", kDiskConfig);
  ASSERT_EQ(cli("run '" + cfg.string() + "'", "first").code, 0);
  ASSERT_EQ(cli("run '" + cfg.string() + "' --set workers=1", "second").code, 0);
  ASSERT_EQ(cli("run '" + cfg.string() + "'", "third").code, 0);
  const std::string a = slurp(dir_ / "first" / "estimate-chi.json");
  EXPECT_EQ(a, slurp(dir_ / "third" / "estimate-chi.json"));
  EXPECT_EQ(slurp(dir_ / "first" / "estimate-chi.csv"), slurp(dir_ / "third" / "estimate-chi.csv"));

  const Json r = Json::parse(a);
  const auto errors = schema().validate(r);
  EXPECT_TRUE(errors.empty()) << errors.front();
  EXPECT_EQ(r["result"]["reference"], 1.0);
  EXPECT_TRUE(r["result"]["estimate"].is_number());
  EXPECT_EQ(r["config"]["seed"], "42");
  EXPECT_EQ(r["version"], gbmc::artifact_version());
  // worker count changes the echo, never the numbers
  const Json w1 = Json::parse(slurp(dir_ / "second" / "estimate-chi.json"));
  EXPECT_EQ(w1["result"], r["result"]);
  EXPECT_NE(w1["config_hash"], r["config_hash"]);

  const std::string csv = slurp(dir_ / "first" / "estimate-chi.csv");
  EXPECT_NE(csv.find(r["config_hash"].get<std::string>()), std::string::npos);
  EXPECT_EQ(first_line_after_comments(csv), "t,value,stderr,analytic,ratio");
}

TEST_F(CliTest, EveryExperimentValidatesAgainstSchema) {
  ASSERT_EQ(cli("calibrate --set seed=0 --set dimensions=2,3").code, 0);
  ASSERT_EQ(cli("local-limit --set seed=1 --set model=hemisphere --set point=interior --set t=0.02,0.01 "
                "--set samples=50")
                .code,
            0);
  ASSERT_EQ(cli("diagnostics --set seed=2 --set samples=40 --set steps=16").code, 0);
  for (const char* name : {"calibrate.json", "local-limit.json", "diagnostics.json"}) {
    const Json r = Json::parse(slurp(dir_ / "out" / name));
    const auto errors = schema().validate(r);
    EXPECT_TRUE(errors.empty()) << name << ": " << errors.front();
  }
  const Json cal = Json::parse(slurp(dir_ / "out" / "calibrate.json"));
  EXPECT_NEAR(cal["result"]["ratio"]["e_3"].get<double>(), 0.5, 1e-2);
}

TEST_F(CliTest, SchemaRejectsBrokenReports) {
  const auto cfg = write_config("disk.cfg", kDiskConfig);
  ASSERT_EQ(cli("run '" + cfg.string() + "'").code, 0);
  Json r = Json::parse(slurp(dir_ / "out" / "estimate-chi.json"));
  Json missing = r;
  missing["result"].erase("estimate");
  EXPECT_FALSE(schema().validate(missing).empty());
  Json extra = r;
  extra["surprise"] = 1;
  EXPECT_FALSE(schema().validate(extra).empty());
  Json bad_hash = r;
  bad_hash["config_hash"] = "xyz";
  EXPECT_FALSE(schema().validate(bad_hash).empty());
}
