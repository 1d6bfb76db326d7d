#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "gesture_asr/cli.hpp"
#include "gesture_asr/config.hpp"
#include "gesture_asr/confidence_filter.hpp"
#include "gesture_asr/errors.hpp"
#include "gesture_asr/fusion.hpp"
#include "gesture_asr/gesture_stats.hpp"
#include "support.hpp"

using namespace gesture_asr;
using nlohmann::json;
using testing_support::fixture;
using testing_support::read_file;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "gesture-asr");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("gasr_test_" + name)).string();
}

}  // namespace

TEST(Cli, StatsCsvMatchesGolden) {
  auto r = run({"stats", "--root", fixture("corpus").string(), "--format", "csv"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, read_file(fixture("golden/stats.csv")));
  auto j = run({"--json", "stats", "--root", fixture("corpus").string()});
  EXPECT_EQ(stats::stats_from_json(j.out), stats::stats_from_json(read_file(fixture("golden/stats.json"))));
}

TEST(Cli, WerManifest) {
  auto r = run({"--json", "wer", "--manifest", fixture("wer/pairs.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(json::parse(r.out)["average_wer"].get<double>(), 0.325, 1e-12);
  auto table = run({"wer", "--manifest", fixture("wer/pairs.jsonl").string()});
  EXPECT_NE(table.out.find("0.325"), std::string::npos);
}

TEST(Cli, ParseReportsDiagnosticsWithExitOne) {
  auto ok = run({"parse", "--root", fixture("corpus").string()});
  EXPECT_EQ(ok.code, 0);
  auto bad = run({"--json", "parse", "--root", fixture("malformed").string()});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("bad_bullet.cha:3"), std::string::npos);
  EXPECT_EQ(json::parse(bad.out)["diagnostics"].size(), 2u);
}

TEST(Cli, FilterRoundTripsJson) {
  auto input = temp_path("filter_in.json");
  {
    asr::ScoredTranscript t{"audio-17", "mock-asr", {{"I", 0.9, {}}, {"um", 0.15, {}}, {"tomato", 0.8, {}}}, {}};
    std::ofstream(input) << asr::to_json(t);
  }
  auto r = run({"--json", "filter", "--input", input});
  ASSERT_EQ(r.code, 0) << r.err;
  auto t = asr::transcript_from_json(r.out);
  EXPECT_EQ(t.text(), "I tomato");
  auto strict = run({"--json", "--threshold", "0.85", "filter", "--input", input});
  EXPECT_EQ(asr::transcript_from_json(strict.out).text(), "I");
  std::remove(input.c_str());
}

TEST(Cli, RewriteWithMocks) {
  auto r = run({"--mock", "rewrite", "--text", "I um... tomato.", "--gesture", "cutting"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "I cut tomato\n");
}

TEST(Cli, GesturesWithMockFixture) {
  auto conf = fixture("case_study/mock.conf").string();
  auto r = run({"--config", conf, "--json", "gestures", "--frames", fixture("case_study/frames/case-4").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["events"][0]["label"], "eating");
}

TEST(Cli, PipelineAndCaseReport) {
  auto conf = fixture("case_study/mock.conf").string();
  auto out = temp_path("report.json");
  auto r = run({"--config", conf, "pipeline", "--manifest", fixture("case_study/manifest.jsonl").string(), "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  auto report = fusion::report_from_json(read_file(out));
  EXPECT_EQ(report.utterances.size(), 3u);
  auto table = run({"case-report", "--report", out});
  EXPECT_EQ(table.code, 0);
  EXPECT_NE(table.out.find("Original"), std::string::npos);
  EXPECT_NE(table.out.find("cutting banana"), std::string::npos);
  auto js = run({"--json", "case-report", "--report", out});
  EXPECT_EQ(json::parse(js.out)["rows"].size(), 3u);
  std::remove(out.c_str());
}

TEST(Cli, FaultInjectionExitsOne) {
  auto conf = fixture("case_study/fault.conf").string();
  auto r = run({"--config", conf, "--json", "pipeline", "--manifest", fixture("case_study/manifest.jsonl").string()});
  EXPECT_EQ(r.code, 1);
  auto j = json::parse(r.out);
  EXPECT_EQ(j["succeeded"].get<int>() + j["failed"].get<int>(), 3);
}

TEST(Cli, UsageAndConfigErrorsExitTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"stats"}).code, 2);
  EXPECT_EQ(run({"--threshold", "1.5", "stats", "--root", fixture("corpus").string()}).code, 2);
  EXPECT_EQ(run({"--parallel", "0", "stats", "--root", fixture("corpus").string()}).code, 2);
  EXPECT_EQ(run({"stats", "--root", fixture("corpus").string(), "--format", "xml"}).code, 2);
  auto bad_conf = temp_path("bad.conf");
  std::ofstream(bad_conf) << "threshold = 0.3\nno_such_key = 1\n";
  auto r = run({"--config", bad_conf, "stats", "--root", fixture("corpus").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 2"), std::string::npos);
  std::remove(bad_conf.c_str());
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Config, FileThenEnvironmentThenFlags) {
  CliConfig c;
  apply_config_text(c, "# comment\nthreshold = 0.3\nparallel = 2\ncandidates = cutting, eating\n");
  EXPECT_DOUBLE_EQ(c.threshold, 0.3);
  EXPECT_EQ(c.parallel, 2);
  EXPECT_EQ(c.candidates.size(), 2u);
  apply_environment(c, [](const char* name) -> const char* {
    return std::string(name) == "GASR_THRESHOLD" ? "0.4" : nullptr;
  });
  EXPECT_DOUBLE_EQ(c.threshold, 0.4);
  EXPECT_NO_THROW(c.validate());
  c.threshold = 2;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(apply_config_text(c, "threshold = abc\n"), ConfigError);
  EXPECT_THROW(apply_config_text(c, "just text\n"), ConfigError);
  EXPECT_THROW(apply_config_text(c, "gesture_source = webcam\n"), ConfigError);
}
