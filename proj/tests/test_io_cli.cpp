#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "phasefuse/io.hpp"

namespace phasefuse {
namespace {

struct CliResult {
  int status;
  std::string out;
  std::string err;
};

CliResult run_cli(std::vector<const char*> args) {
  args.insert(args.begin(), "phasefuse");
  std::ostringstream out, err;
  const int status = cli::run(static_cast<int>(args.size()), args.data(), out, err);
  return {status, out.str(), err.str()};
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);) out.push_back(line);
  return out;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("phasefuse_test_" + name);
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1.0), "1");
  EXPECT_EQ(format_double(1e-300), "1e-300");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_EQ(format_optional(std::nullopt), "");
}

SweepResult tiny_result() {
  SweepResult r;
  r.sweep = SweepKind::AntennaSweep;
  SweepPoint p;
  p.value = 8;
  p.trials = 3;
  p.lower_bound_mean = 0.25;
  p.eq17 = 0.5;
  p.strategies.push_back({PhaseStrategy::sdp_relaxation(), 0.3, 0.01, 1});
  p.strategies.push_back({PhaseStrategy::all_ones(), 0.6, 0.02, 0});
  r.points.push_back(p);
  return r;
}

TEST(WriteCsv, SchemaAndEmptyFields) {
  std::ostringstream os;
  write_csv(tiny_result(), os);
  const auto lines = lines_of(os.str());
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0], kCsvHeader);
  EXPECT_EQ(lines[1], "M,8,sdp,0.3,0.01,0.25,,,0.5,3,1");
  EXPECT_EQ(lines[2], "M,8,all-ones,0.6,0.02,0.25,,,0.5,3,0");
}

TEST(WriteJson, MirrorsCsvRows) {
  const nlohmann::json j = to_json(tiny_result());
  ASSERT_EQ(j.size(), 2u);
  EXPECT_EQ(j[0]["sweep_param"], "M");
  EXPECT_EQ(j[0]["strategy"], "sdp");
  EXPECT_TRUE(j[0]["eq11"].is_null());
  EXPECT_EQ(j[1]["eq17"], 0.5);
  EXPECT_EQ(j[1]["failures"], 0);
  std::istringstream hdr(kCsvHeader);
  for (std::string key; std::getline(hdr, key, ',');) EXPECT_TRUE(j[0].contains(key)) << key;
}

TEST(PlotScript, ReferencesStrategiesAndAsymptote) {
  const std::string s = plot_script(tiny_result(), "out/fig2.csv");
  EXPECT_NE(s.find("set output \"out/fig2.png\""), std::string::npos);
  EXPECT_NE(s.find("set logscale x 2"), std::string::npos);
  EXPECT_NE(s.find("eq \"sdp\""), std::string::npos);
  EXPECT_NE(s.find("eq \"all-ones\""), std::string::npos);
  EXPECT_NE(s.find("column(\"eq17\")"), std::string::npos);
  EXPECT_EQ(s.find("column(\"eq11\")"), std::string::npos);
}

TEST(Cli, Fig1SmallSweepCsv) {
  const auto r = run_cli({"fig1", "--trials", "3", "--sweep", "2,4", "--seed", "9"});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto lines = lines_of(r.out);
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[0], kCsvHeader);
  EXPECT_EQ(lines[1].rfind("N,2,sdp,", 0), 0u);
  EXPECT_EQ(lines[4].rfind("N,4,all-ones,", 0), 0u);
}

TEST(Cli, Fig2JsonAndPlotScriptFiles) {
  const auto csv = temp_path("fig2.json");
  const auto gp = temp_path("fig2.gp");
  const auto r = run_cli({"fig2", "--trials", "2", "--sweep", "1,2", "--format", "json", "--output",
                          csv.c_str(), "--emit-plot-script", gp.c_str()});
  ASSERT_EQ(r.status, 0) << r.err;
  std::ifstream in(csv);
  const nlohmann::json j = nlohmann::json::parse(in);
  EXPECT_EQ(j.size(), 4u);
  EXPECT_EQ(j[0]["sweep_param"], "M");
  EXPECT_TRUE(std::filesystem::exists(gp));
  std::filesystem::remove(csv);
  std::filesystem::remove(gp);
}

TEST(Cli, SameSeedSameBytes) {
  const auto a = run_cli({"fig1", "--trials", "2", "--sweep", "2,6", "--seed", "42"});
  const auto b = run_cli({"fig1", "--trials", "2", "--sweep", "2,6", "--seed", "42"});
  const auto c = run_cli({"fig1", "--trials", "2", "--sweep", "2,6", "--seed", "43"});
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, c.out);
}

TEST(Cli, RunSubcommandListsDefaultStrategies) {
  const auto r = run_cli({"run", "--sensors", "2", "--antennas", "3"});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto lines = lines_of(r.out);
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[1].rfind("closed-form-n2,", 0), 0u);
  EXPECT_EQ(lines[2].rfind("sdp,", 0), 0u);
  EXPECT_EQ(lines[3].rfind("all-ones,", 0), 0u);
  EXPECT_EQ(lines[4].rfind("grid,", 0), 0u);
}

TEST(Cli, RunJson) {
  const auto r = run_cli({"run", "--sensors", "5", "--format", "json", "--strategies", "sdp"});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["reports"].size(), 1u);
  EXPECT_EQ(j["reports"][0]["phases_rad"].size(), 5u);
  EXPECT_TRUE(j["reports"][0].contains("sdp"));
}

TEST(Cli, OracleAndSelftest) {
  const auto o = run_cli({"oracle", "--trials", "4", "--antennas", "2"});
  ASSERT_EQ(o.status, 0) << o.err;
  EXPECT_NE(o.err.find("/ 4 instances"), std::string::npos);
  const auto s = run_cli({"selftest"});
  EXPECT_EQ(s.status, 0) << s.out;
  EXPECT_EQ(s.out.find("FAIL"), std::string::npos);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run_cli({}).status, 2);
  EXPECT_EQ(run_cli({"bogus"}).status, 2);
  EXPECT_EQ(run_cli({"fig1", "--trials", "0"}).status, 2);
  EXPECT_EQ(run_cli({"fig1", "--dist-range", "7,2"}).status, 2);
  EXPECT_EQ(run_cli({"fig1", "--dist-range", "abc"}).status, 2);
  EXPECT_EQ(run_cli({"fig1", "--strategies", "magic"}).status, 2);
  EXPECT_EQ(run_cli({"fig1", "--sweep", "2,x"}).status, 2);
  EXPECT_EQ(run_cli({"fig1", "--format", "xml"}).status, 2);
  EXPECT_EQ(run_cli({"run", "--sensors", "3", "--strategies", "closed-form-n2"}).status, 2);
  EXPECT_EQ(run_cli({"fig1", "--strategies", "grid", "--sweep", "2,8", "--trials", "1"}).status, 2);
}

TEST(Cli, HelpExitsZero) {
  const auto r = run_cli({"--help"});
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("fig1"), std::string::npos);
}

TEST(Cli, UnwritableOutputExitsOne) {
  const auto r = run_cli({"fig1", "--trials", "1", "--sweep", "2", "--output",
                          "/nonexistent-dir/x.csv"});
  EXPECT_EQ(r.status, 1);
}

TEST(Cli, ThreadsFromEnvironment) {
  ::setenv("PHASEFUSE_THREADS", "3", 1);
  EXPECT_EQ(cli::threads_from_env(), 3u);
  ::unsetenv("PHASEFUSE_THREADS");
  EXPECT_EQ(cli::threads_from_env(), 0u);
}

}  // namespace
}  // namespace phasefuse
