#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <string>

#include "cli_support.hpp"

using namespace qgrid::testing;
using nlohmann::json;

namespace {

std::string out_arg(const ScratchDir& d, const std::string& sub) { return "--out \"" + (d / sub).string() + "\""; }

fs::path write_config(const ScratchDir& d, const std::string& name, const std::string& text) {
    const auto p = d / name;
    spit(p, text);
    return p;
}

}  // namespace

TEST(Cli, AllMarkedSearchSucceedsInOneRound) {
    ScratchDir d;
    const auto r = run_cli("--config " + config_path("search_all_marked.json") + " " + out_arg(d, "o"), d);
    ASSERT_EQ(r.exit_code, 0) << r.stderr_text;
    const auto rep = load_report(d / "o/search.json");
    EXPECT_EQ(rep["schema_version"], 1);
    EXPECT_EQ(rep["result"]["success"], true);
    EXPECT_EQ(rep["result"]["rounds_used"], 1);
    EXPECT_EQ(rep["config"]["seed"], 3);
}

TEST(Cli, NoSolutionSearchExhausts) {
    ScratchDir d;
    const auto r = run_cli("--config " + config_path("search_no_solution.json") + " " + out_arg(d, "o"), d);
    EXPECT_EQ(r.exit_code, 2);
    const auto rep = load_report(d / "o/search.json");
    EXPECT_EQ(rep["result"]["success"], false);
    EXPECT_EQ(rep["result"]["rounds_used"], 10);
}

TEST(Cli, FlagsOverrideConfig) {
    ScratchDir d;
    const auto r = run_cli("--config " + config_path("search_no_solution.json") +
                               " --max-rounds 4 --seed 99 --strict-paper " + out_arg(d, "o"),
                           d);
    EXPECT_EQ(r.exit_code, 2);
    const auto rep = load_report(d / "o/search.json");
    EXPECT_EQ(rep["result"]["rounds_used"], 4);
    EXPECT_EQ(rep["seed"], 99);
    EXPECT_EQ(rep["config"]["schedule"]["strict_paper"], true);
    EXPECT_EQ(rep["schedule"]["policy"], "strict_paper");
}

TEST(Cli, SearchIsDeterministicAcrossJobs) {
    ScratchDir d;
    for (const char* jobs : {"1", "4"}) {
        const auto r = run_cli("--config " + config_path("search_k3.json") + " --jobs " + jobs + " " +
                                   out_arg(d, std::string("j") + jobs),
                               d);
        ASSERT_EQ(r.exit_code, 0) << r.stderr_text;
    }
    EXPECT_EQ(without_timestamp(d / "j1/search.json"), without_timestamp(d / "j4/search.json"));
}

TEST(Cli, ToyBisectTrace) {
    ScratchDir d;
    const auto r = run_cli("--config " + config_path("toy_bisect.json") + " " + out_arg(d, "o"), d);
    ASSERT_EQ(r.exit_code, 0) << r.stderr_text;
    const auto res = load_report(d / "o/bisect.json")["result"];
    EXPECT_EQ(res["interval"]["a"], 0.0);
    EXPECT_EQ(res["interval"]["b"], 2.0);
    EXPECT_EQ(res["rounds"], 3);
    ASSERT_EQ(res["trace"].size(), 3u);
    EXPECT_EQ(res["trace"][0]["branch"], "lower");
    EXPECT_EQ(res["trace"][1]["branch"], "lower");
    EXPECT_EQ(res["trace"][2]["branch"], "none");
    EXPECT_EQ(res["trace"][2]["lower"]["has_solution"], false);
    EXPECT_EQ(res["trace"][2]["upper"]["has_solution"], false);
}

TEST(Cli, BisectRejectsZeroMaxCountAndBadBracket) {
    ScratchDir d;
    auto r = run_cli("--config " + config_path("toy_bisect.json") + " --max-count 0 " + out_arg(d, "o"), d);
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.stderr_text.find("max_count"), std::string::npos);

    const auto cfg = write_config(d, "bad.json", R"({
  "mode": "bisect",
  "cost": {"type": "index_sum", "sizes": [8], "offset": 1},
  "bisect": {"a0": 5, "b0": 3}
})");
    r = run_cli("--config \"" + cfg.string() + "\" " + out_arg(d, "o2"), d);
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.stderr_text.find("bad.json:4:"), std::string::npos) << r.stderr_text;
}

TEST(Cli, AutoUpperBoundIsRecordedAndDeterministic) {
    ScratchDir d;
    const auto cfg = write_config(d, "auto.json", R"({
  "mode": "bisect",
  "seed": 17,
  "cost": {"type": "index_sum", "sizes": [6, 6], "offset": 1, "weights": [1, 2]},
  "bisect": {"b0": "auto", "max_count": 4}
})");
    for (const char* o : {"a", "b"}) ASSERT_EQ(run_cli("--config \"" + cfg.string() + "\" " + out_arg(d, o), d).exit_code, 0);
    const auto a = load_report(d / "a/bisect.json");
    EXPECT_EQ(a, load_report(d / "b/bisect.json"));
    EXPECT_EQ(a["result"]["b0_source"], "initial_upper_bound");
    EXPECT_GE(a["result"]["b0"].get<double>(), 1.0);
}

TEST(Cli, StraightLineGridGivesClosedFormCost) {
    ScratchDir d;
    const auto r = run_cli("--config " + config_path("straight_line.json") + " " + out_arg(d, "o"), d);
    ASSERT_EQ(r.exit_code, 0) << r.stderr_text;
    const auto res = load_report(d / "o/brachistochrone.json")["result"];
    const double line = std::numbers::pi * std::sqrt(1.0 + 4.0 / (std::numbers::pi * std::numbers::pi)) / std::sqrt(9.8);
    EXPECT_NEAR(res["best"]["cost"].get<double>(), line, 1e-3);
    EXPECT_NEAR(res["references"]["straight_line_time"].get<double>(), line, 1e-12);

    const auto csv = slurp(d / "o/brachistochrone_samples.csv");
    EXPECT_EQ(csv.find('\r'), std::string::npos);
    std::istringstream in(csv);
    std::string line_text;
    std::getline(in, line_text);
    EXPECT_EQ(line_text.rfind("# {", 0), 0u);
    std::getline(in, line_text);
    EXPECT_EQ(line_text, "x,y");
    int rows = 0;
    while (std::getline(in, line_text)) ++rows;
    EXPECT_EQ(rows, 5);
}

TEST(Cli, BrachistochroneSandwich) {
    ScratchDir d;
    const auto r = run_cli("--config " + config_path("brachistochrone.json") + " " + out_arg(d, "o"), d);
    ASSERT_EQ(r.exit_code, 0) << r.stderr_text;
    const auto res = load_report(d / "o/brachistochrone.json")["result"];
    const double best = res["brute_force"]["cost"].get<double>();
    EXPECT_GE(best, std::numbers::pi / std::sqrt(9.8) - 0.01);
    EXPECT_LE(best, res["references"]["straight_line_time"].get<double>() + 1e-3);
    EXPECT_EQ(res["references"]["within_sandwich"], true);
    EXPECT_EQ(res["brute_force"]["paths"], 512);
}

TEST(Cli, CapExceededIsAConfigError) {
    ScratchDir d;
    const auto cfg = write_config(d, "cap.json", R"({
  "mode": "brachistochrone",
  "cost": {"type": "brachistochrone", "k": 3, "n": 8, "enumeration_cap": 100}
})");
    const auto r = run_cli("--config \"" + cfg.string() + "\" " + out_arg(d, "o"), d);
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.stderr_text.find("cap"), std::string::npos);
}

TEST(Cli, AnalyzeEmptySweepAndDegenerateBuckets) {
    ScratchDir d;
    auto cfg = write_config(d, "empty.json", R"({
  "mode": "analyze",
  "problem": {"buckets": [{"n": 16, "marked_count": 1}]},
  "analyze": {"lemma": {"m_values": []}}
})");
    auto r = run_cli("--config \"" + cfg.string() + "\" " + out_arg(d, "o"), d);
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.stderr_text.find("empty m sweep"), std::string::npos) << r.stderr_text;

    cfg = write_config(d, "degenerate.json", R"({
  "mode": "analyze",
  "problem": {"buckets": [{"n": 16, "marked_count": 16}]},
  "analyze": {"lemma": {"m_values": [2, 3]}}
})");
    r = run_cli("--config \"" + cfg.string() + "\" " + out_arg(d, "o"), d);
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.stderr_text.find("degenerate"), std::string::npos);
}

TEST(Cli, AnalyzeLemmaSweepHasNoViolations) {
    ScratchDir d;
    const auto cfg = write_config(d, "lemma.json", R"({
  "mode": "analyze",
  "seed": 8,
  "problem": {"buckets": [{"n": 64, "marked_count": 1}, {"n": 32, "marked_count": 3}]},
  "analyze": {"lemma": {"m_range": "auto", "trials": 4000}, "runtime": {"trials": 50}}
})");
    const auto r = run_cli("--config \"" + cfg.string() + "\" --jobs 2 " + out_arg(d, "o"), d);
    ASSERT_EQ(r.exit_code, 0) << r.stderr_text;
    const auto rep = load_report(d / "o/analyze.json");
    EXPECT_EQ(rep["result"]["bound_violations"], 0);
    EXPECT_GT(rep["result"]["lemma_rows"].size(), 0u);
    for (const auto& row : rep["result"]["runtime_rows"]) EXPECT_EQ(row["mean_within_bound"], true);
    const auto csv = slurp(d / "o/lemma_sweep.csv");
    EXPECT_NE(csv.find("\nm,trials,successes,empirical,closed_form"), std::string::npos);
}

TEST(Cli, ConfigErrorsCarryLineNumbers) {
    ScratchDir d;
    auto cfg = write_config(d, "syntax.json", "{\n  \"mode\": \"search\",\n  \"seed\": ,\n}\n");
    auto r = run_cli("--config \"" + cfg.string() + "\" " + out_arg(d, "o"), d);
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.stderr_text.find("syntax.json:3:"), std::string::npos) << r.stderr_text;

    cfg = write_config(d, "unknown.json", "{\n  \"mode\": \"search\",\n  \"problem\": {\n    \"bukkets\": []\n  }\n}\n");
    r = run_cli("--config \"" + cfg.string() + "\" " + out_arg(d, "o"), d);
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.stderr_text.find("unknown.json:4:"), std::string::npos) << r.stderr_text;

    cfg = write_config(d, "lambda.json", R"({
  "mode": "search",
  "problem": {"buckets": [{"n": 8, "marked": [1]}]},
  "schedule": {
    "lambda": 1.5
  }
})");
    r = run_cli("--config \"" + cfg.string() + "\" " + out_arg(d, "o"), d);
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.stderr_text.find("lambda.json:5:"), std::string::npos) << r.stderr_text;
}

TEST(Cli, UsageErrors) {
    ScratchDir d;
    EXPECT_EQ(run_cli("--mode nonsense", d).exit_code, 1);
    EXPECT_EQ(run_cli("--config /nonexistent/config.json", d).exit_code, 1);
    EXPECT_EQ(run_cli(out_arg(d, "o"), d).exit_code, 1);  // no mode
    EXPECT_EQ(run_cli("--mode search --jobs 0", d).exit_code, 1);
    EXPECT_EQ(run_cli("--help", d).exit_code, 0);
}

TEST(Cli, EmbeddedConfigReproducesReport) {
    ScratchDir d;
    ASSERT_EQ(run_cli("--config " + config_path("brachistochrone.json") + " " + out_arg(d, "first"), d).exit_code, 0);
    const auto first = load_report(d / "first/brachistochrone.json");
    const auto cfg = write_config(d, "echo.json", first["config"].dump(2));
    ASSERT_EQ(run_cli("--config \"" + cfg.string() + "\" --jobs 3 " + out_arg(d, "second"), d).exit_code, 0);
    EXPECT_EQ(first, load_report(d / "second/brachistochrone.json"));
    EXPECT_EQ(slurp(d / "first/brachistochrone_samples.csv"), slurp(d / "second/brachistochrone_samples.csv"));
}
