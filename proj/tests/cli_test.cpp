#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "warprig/cli/run_config.hpp"
#include "warprig/surface_io.hpp"

using namespace warprig;
using namespace warprig::cli;

namespace {

const char* kVerify = R"({
  "task": "verify",
  "ambient": {"n": 3, "warp": {"mean": 2.0, "cos": [1.0]}},
  "params": {"samples": 32, "dimensions": [3, 4]}
})";

const char* kMinimize = R"({
  "task": "minimize",
  "ambient": {"n": 3, "warp": {"mean": 2.0, "cos": [1.0]}},
  "grid": {"resolution": [16, 16]},
  "params": {
    "initial": {"height": 0.0, "terms": [{"amplitude": 0.2, "wavenumbers": [1, 0]}]},
    "expected_energy": 39.47841760435743,
    "expect_slice": true
  }
})";

std::string read(const std::filesystem::path& p) {
  std::ifstream is(p);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string error_of(const std::string& text, const std::string& verb = "") {
  try {
    parse_config(text, verb);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, DefaultsFilledIn) {
  const auto cfg = parse_config(kMinimize);
  EXPECT_EQ(cfg.task, "minimize");
  EXPECT_EQ(cfg.spec.n, 3);
  EXPECT_EQ(cfg.spec.gamma, 2.0);
  EXPECT_NEAR(cfg.spec.fiber.periods[0], 2 * std::numbers::pi, 1e-15);
  EXPECT_EQ(cfg.resolution, (std::vector<int>{16, 16}));
  EXPECT_EQ(cfg.scheme, DifferenceScheme::spectral);
  EXPECT_TRUE(cfg.weight().is_canonical());
  EXPECT_EQ(cfg.tolerance("htilde_residual"), 1e-10);
  EXPECT_EQ(cfg.tolerance("energy"), 1e-8);
  const auto& mp = std::get<MinimizeParams>(cfg.params);
  EXPECT_TRUE(mp.expect_slice);
  ASSERT_EQ(mp.initial.terms.size(), 1u);
  EXPECT_EQ(parse_config(kVerify).resolution, (std::vector<int>{64, 64}));
}

TEST(Config, RejectsUnknownKeysWithFieldPath) {
  const std::string e = error_of(R"({"task":"verify","ambient":{"n":3,"warp":{"mean":2.0},"colour":"blue"}})");
  EXPECT_NE(e.find("ambient.colour"), std::string::npos) << e;
  EXPECT_NE(error_of(R"({"task":"verify","ambient":{"n":3,"warp":{"mean":2.0}},"extra":1})").find("extra"),
            std::string::npos);
}

TEST(Config, RejectsBadValues) {
  EXPECT_FALSE(error_of(R"({"task":"verify","ambient":{"n":"three","warp":{"mean":2.0}}})").empty());
  EXPECT_FALSE(error_of(R"({"task":"verify","ambient":{"n":9,"warp":{"mean":2.0}}})").empty());
  EXPECT_FALSE(error_of(R"({"task":"verify","ambient":{"n":3,"warp":{"mean":0.5,"cos":[1.0]}}})").empty());
  EXPECT_FALSE(error_of(R"({"task":"fly","ambient":{"n":3,"warp":{"mean":2.0}}})").empty());
  EXPECT_FALSE(error_of(R"({"task":"verify","ambient":{"n":3,"warp":{"mean":2.0}},"tolerances":{"x":-1}})").empty());
  EXPECT_FALSE(error_of("{ not json").empty());
  const std::string missing = error_of(R"({"task":"verify"})");
  EXPECT_NE(missing.find("ambient"), std::string::npos) << missing;
}

TEST(Config, VerbMustAgreeWithTask) {
  EXPECT_FALSE(error_of(kVerify, "minimize").empty());
  EXPECT_EQ(parse_config(kVerify, "verify").task, "verify");
  EXPECT_EQ(parse_config(R"({"ambient":{"n":3,"warp":{"mean":2.0}}})", "verify").task, "verify");
}

TEST(Config, HashIgnoresFormattingButNotContent) {
  const auto a = parse_config(kVerify);
  const auto b = parse_config(R"({"params":{"dimensions":[3,4],"samples":32},"ambient":{"warp":{"cos":[1.0],"mean":2.0},"n":3},"task":"verify"})");
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 64u);
  const auto c = parse_config(R"({"task":"verify","ambient":{"n":3,"warp":{"mean":2.0,"cos":[1.0]}},"params":{"samples":33}})");
  EXPECT_NE(config_hash(a), config_hash(c));
}

TEST(Report, VerifyRunPassesAndRoundTrips) {
  const RunReport r = run_config(parse_config(kVerify));
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(r.tables.count("identities_n3"), 1u);
  EXPECT_EQ(r.tables.at("identities_n4").rows.size(), 32u);
  const RunReport back = report_from_json(nlohmann::json::parse(report_json_text(r)));
  EXPECT_EQ(back, r);
  EXPECT_EQ(report_json_text(back), report_json_text(r));
}

TEST(Report, RepeatedRunsAreByteIdentical) {
  const auto cfg = parse_config(kMinimize);
  const std::string a = report_json_text(run_config(cfg));
  const std::string b = report_json_text(run_config(cfg));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.find("finished"), std::string::npos);
}

TEST(Report, ToleranceScaleFlipsVerdict) {
  const auto cfg = parse_config(kMinimize);
  EXPECT_TRUE(run_config(cfg).passed());
  const RunReport strict = run_config(cfg, 1e-12);
  EXPECT_FALSE(strict.passed());
  EXPECT_THROW(run_config(cfg, 0.0), std::invalid_argument);
  EXPECT_THROW(run_config(cfg, std::nan("")), std::invalid_argument);
}

TEST(Report, NonFiniteValuesSurviveJson) {
  RunReport r;
  r.task = "verify";
  r.add_check("a", std::nan(""), 1.0);
  r.add_check("b", 0.5, HUGE_VAL);
  r.tables["t"] = Table{{"x", "y"}, {{1.0, -HUGE_VAL}}};
  const std::string text = report_json_text(r);
  EXPECT_NE(text.find("\"nan\""), std::string::npos);
  const RunReport back = report_from_json(nlohmann::json::parse(text));
  EXPECT_TRUE(std::isnan(back.checks[0].value));
  EXPECT_FALSE(back.checks[0].pass);
  EXPECT_TRUE(std::isinf(back.checks[1].tolerance));
  EXPECT_EQ(back.tables.at("t").rows[0][1], -HUGE_VAL);
}

TEST(Report, CsvSchemas) {
  RunReport r;
  r.add_check("energy", 0.25, 1e-8);
  EXPECT_EQ(checks_csv(r), "name,value,tolerance,pass\nenergy,0.25,1e-08,0\n");
  const Table t{{"t", "htilde"}, {{0.5, 0.0}, {1.0, std::nan("")}}};
  EXPECT_EQ(table_csv(t), "t,htilde\n0.5,0\n1,nan\n");
  EXPECT_THROW(parse_format("xml"), std::invalid_argument);
}

TEST(Report, EmitWritesEveryFormat) {
  const auto dir = std::filesystem::temp_directory_path() / "warprig_cli_test_emit";
  std::filesystem::remove_all(dir);
  const RunReport r = run_config(parse_config(kMinimize));
  emit_report(r, ReportFormat::json, dir, "2000-01-01T00:00:00Z");
  emit_report(r, ReportFormat::csv, dir, "2000-01-01T00:00:00Z");
  emit_report(r, ReportFormat::text, dir, "2000-01-01T00:00:00Z");
  for (const char* f : {"report.json", "checks.csv", "trace.csv", "geometry.csv", "report.txt", "surface.json",
                        "run_meta.json"})
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  EXPECT_EQ(read(dir / "report.json"), report_json_text(r));
  EXPECT_NE(read(dir / "run_meta.json").find("2000-01-01T00:00:00Z"), std::string::npos);
  EXPECT_NE(read(dir / "report.txt").find("verdict: PASS"), std::string::npos);
  const auto snap = surface_from_snapshot_json(read(dir / "surface.json"));
  EXPECT_EQ(snap.rho.size(), 256u);
  std::filesystem::remove_all(dir);
}
