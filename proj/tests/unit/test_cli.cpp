#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "lissnas/csv.hpp"
#include "lissnas/spaces.hpp"
#include "temp_dir.hpp"

using namespace lissnas;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

nlohmann::json summary(const std::string& dir) { return nlohmann::json::parse(slurp(dir + "/summary.json")); }

std::string block_spec(const TempDir& tmp, int layers, int choices) {
  const auto path = tmp.file("spec_" + std::to_string(layers) + "x" + std::to_string(choices) + ".json");
  save_spec(SpaceSpec::block_uniform(layers, choices), path);
  return path;
}

// Lean shrink settings so the suite stays fast.
std::vector<std::string> quick_shrink(const std::string& out, const std::string& seed, const std::string& threads) {
  return {"--seed", seed, "--out", out, "--threads", threads, "shrink", "--predictor", "oracle_lookup"};
}

}  // namespace

TEST(CliGen, EnumeratesSmallBlockSpace) {
  TempDir tmp;
  const auto spec = block_spec(tmp, 2, 2);
  const auto r = run_cli({"--seed", "3", "--space", spec, "--out", tmp.file("g"), "gen-synthetic"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto table = csv::read_file(tmp.file("g/benchmark.csv"));
  EXPECT_EQ(table.rows.size(), 4U);
  EXPECT_TRUE(fs::exists(tmp.file("g/spec.json")));
  EXPECT_TRUE(r.err.empty());
}

TEST(CliGen, SameSeedSameBytes) {
  TempDir tmp;
  const auto spec = block_spec(tmp, 4, 3);
  ASSERT_EQ(run_cli({"--seed", "9", "--space", spec, "--out", tmp.file("a"), "gen-synthetic"}).code, 0);
  ASSERT_EQ(run_cli({"--seed", "9", "--space", spec, "--out", tmp.file("b"), "gen-synthetic"}).code, 0);
  EXPECT_EQ(slurp(tmp.file("a/benchmark.csv")), slurp(tmp.file("b/benchmark.csv")));
}

TEST(CliGen, FallsBackToSamplingWithWarning) {
  TempDir tmp;
  const auto spec = block_spec(tmp, 3, 3);
  const auto r = run_cli({"--seed", "1", "--space", spec, "--out", tmp.file("g"), "gen-synthetic", "--enumeration-limit",
                      "10", "--samples", "50"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("warning"), std::string::npos);
  const auto rows = csv::read_file(tmp.file("g/benchmark.csv")).rows.size();
  EXPECT_GE(rows, 1U);
  EXPECT_LE(rows, 27U);
}

TEST(CliGen, GeneratedTableReloads) {
  TempDir tmp;
  const auto spec_path = block_spec(tmp, 3, 2);
  ASSERT_EQ(run_cli({"--seed", "2", "--space", spec_path, "--out", tmp.file("g"), "gen-synthetic"}).code, 0);
  const auto spec = load_spec(tmp.file("g/spec.json"));
  const auto oracle = load_table(tmp.file("g/benchmark.csv"), spec);
  EXPECT_EQ(oracle.table_size(), 8U);
  EXPECT_EQ(table_to_csv(oracle), slurp(tmp.file("g/benchmark.csv")));
}

TEST(CliErrors, MissingSpecIsConfigErrorWithoutOutputs) {
  TempDir tmp;
  const auto r = run_cli({"--seed", "1", "--space", tmp.file("nope.json"), "--out", tmp.file("o"), "shrink"});
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(fs::exists(tmp.file("o")));
}

TEST(CliErrors, SeedIsRequired) {
  TempDir tmp;
  EXPECT_EQ(run_cli({"--out", tmp.file("o"), "gen-synthetic"}).code, 2);
  EXPECT_FALSE(fs::exists(tmp.file("o")));
}

TEST(CliErrors, UnknownFlagAndMissingSubcommand) {
  EXPECT_EQ(run_cli({"shrink", "--bogus"}).code, 2);
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"--help"}).code, 0);
}

TEST(CliErrors, UnknownConfigKey) {
  TempDir tmp;
  std::ofstream(tmp.file("c.json")) << R"({"seed": 1, "shrinkk": {}})";
  EXPECT_EQ(run_cli({"--config", tmp.file("c.json"), "--out", tmp.file("o"), "shrink"}).code, 2);
}

TEST(CliErrors, BudgetBelowInitialSample) {
  TempDir tmp;
  auto args = quick_shrink(tmp.file("o"), "1", "1");
  args.insert(args.end(), {"--query-budget", "10"});
  EXPECT_EQ(run_cli(args).code, 4);
  EXPECT_FALSE(fs::exists(tmp.file("o")));
}

TEST(CliErrors, OracleMissStorm) {
  TempDir tmp;
  const auto spec = block_spec(tmp, 6, 4);
  std::ofstream(tmp.file("t.csv")) << "architecture_text,accuracy,flops,params\n"
                                   << "\"0,0,0,0,0,0\",0.9,1,1\n\"1,1,1,1,1,1\",0.8,1,1\n";
  const auto r = run_cli({"--seed", "1", "--space", spec, "--out", tmp.file("o"), "shrink", "--benchmark",
                      tmp.file("t.csv"), "--predictor", "oracle_lookup"});
  EXPECT_EQ(r.code, 3) << r.err;
}

TEST(CliConfig, FlagsOverrideConfigFile) {
  TempDir tmp;
  std::ofstream(tmp.file("c.json")) << R"({"seed": 5, "out": "/nonexistent/should/not/be/used",
      "predictor": {"kind": "oracle_lookup"}, "shrink": {"max_iterations": 1}})";
  const auto r = run_cli({"--config", tmp.file("c.json"), "--out", tmp.file("o"), "shrink"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto s = summary(tmp.file("o"));
  EXPECT_EQ(s["seed"], 5);
  EXPECT_EQ(s["predictor"], "oracle_lookup");
  EXPECT_EQ(s["iterations_run"], 1);
}

TEST(CliShrink, ReducesDefaultSpaceTenfold) {
  TempDir tmp;
  const auto r = run_cli(quick_shrink(tmp.file("o"), "4", "2"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto s = summary(tmp.file("o"));
  EXPECT_GE(s["reduction_factor"].get<double>(), 10.0);
  EXPECT_GT(s["mean_accuracy"].get<double>(), s["initial_mean_accuracy"].get<double>());
  for (const char* f : {"snapshot.csv", "trace.csv", "initial_sample.csv"}) EXPECT_TRUE(fs::exists(tmp.file("o") + "/" + f));

  const auto snap = load_snapshot(tmp.file("o/snapshot.csv"), SpaceSpec::synthetic_default());
  EXPECT_EQ(snap.size(), s["snapshot_size"].get<std::size_t>());
  EXPECT_EQ(snapshot_to_csv(snap), slurp(tmp.file("o/snapshot.csv")));
  EXPECT_EQ(trace_to_csv(trace_from_csv(slurp(tmp.file("o/trace.csv")))), slurp(tmp.file("o/trace.csv")));
}

TEST(CliShrink, RidgeWritesReloadablePredictor) {
  TempDir tmp;
  ASSERT_EQ(run_cli({"--seed", "2", "--out", tmp.file("a"), "shrink", "--train-size", "300"}).code, 0);
  ASSERT_TRUE(fs::exists(tmp.file("a/predictor.json")));
  const auto r = run_cli({"--seed", "2", "--out", tmp.file("b"), "shrink", "--predictor", "file", "--predictor-file",
                      tmp.file("a/predictor.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(tmp.file("a/snapshot.csv")), slurp(tmp.file("b/snapshot.csv")));
}

TEST(CliShrink, PredictorFromOtherSpaceIsRejected) {
  TempDir tmp;
  ASSERT_EQ(run_cli({"--seed", "2", "--out", tmp.file("a"), "shrink", "--train-size", "300"}).code, 0);
  const auto r = run_cli({"--seed", "2", "--space", block_spec(tmp, 3, 3), "--out", tmp.file("b"), "shrink",
                      "--predictor", "file", "--predictor-file", tmp.file("a/predictor.json")});
  EXPECT_EQ(r.code, 2);
}

TEST(CliShrink, NaiveTopxWritesSnapshotWithoutTrace) {
  TempDir tmp;
  auto args = quick_shrink(tmp.file("o"), "3", "1");
  args.insert(args.end(), {"--variant", "naive-topx", "--sample-budget", "2000", "--x", "0.05"});
  const auto r = run_cli(args);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_FALSE(fs::exists(tmp.file("o/trace.csv")));
  const auto s = summary(tmp.file("o"));
  EXPECT_EQ(s["queries"], 2000);
  EXPECT_LE(s["snapshot_size"].get<std::size_t>(), 100U);
}

TEST(CliShrink, ByteIdenticalAcrossThreadCounts) {
  TempDir tmp;
  ASSERT_EQ(run_cli(quick_shrink(tmp.file("a"), "11", "1")).code, 0);
  ASSERT_EQ(run_cli(quick_shrink(tmp.file("b"), "11", "8")).code, 0);
  for (const char* f : {"snapshot.csv", "trace.csv", "initial_sample.csv", "summary.json"}) {
    EXPECT_EQ(slurp(tmp.file("a") + "/" + f), slurp(tmp.file("b") + "/" + f)) << f;
  }
}

TEST(CliLocality, RwaRowsAndAadTags) {
  TempDir tmp;
  const auto r = run_cli({"--seed", "1", "--out", tmp.file("o"), "analyze-locality", "--walks", "20", "--walk-length",
                      "30", "--max-lag", "6", "--pairs", "100"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rwa = csv::read_file(tmp.file("o/rwa.csv"));
  ASSERT_EQ(rwa.rows.size(), 7U);
  EXPECT_EQ(rwa.rows[0][1], "1");
  const auto aad = csv::read_file(tmp.file("o/aad.csv"));
  for (const auto& row : aad.rows) EXPECT_EQ(row[0], "both");

  const auto c = run_cli({"--seed", "1", "--space", "nasbench101", "--out", tmp.file("c"), "analyze-locality", "--walks",
                      "10", "--walk-length", "20", "--pairs", "50"});
  ASSERT_EQ(c.code, 0) << c.err;
  std::set<std::string> tags;
  for (const auto& row : csv::read_file(tmp.file("c/aad.csv")).rows) tags.insert(row[0]);
  EXPECT_EQ(tags, (std::set<std::string>{"both", "operation", "edge"}));
}

TEST(CliLocality, ConstantOracleIsDegenerate) {
  TempDir tmp;
  const auto spec_path = block_spec(tmp, 3, 2);
  const auto spec = load_spec(spec_path);
  std::string table = "architecture_text,accuracy,flops,params\n";
  for (const auto& a : enumerate_block_space(spec)) table += csv::quote(to_text(a)) + ",0.9,1,1\n";
  std::ofstream(tmp.file("t.csv")) << table;
  const auto r = run_cli({"--seed", "1", "--space", spec_path, "--out", tmp.file("o"), "analyze-locality",
                      "--benchmark", tmp.file("t.csv"), "--walks", "5", "--walk-length", "10"});
  EXPECT_EQ(r.code, 5);
  EXPECT_FALSE(fs::exists(tmp.file("o")));
}

TEST(CliCompare, SelfComparisonHasZeroStatistic) {
  TempDir tmp;
  ASSERT_EQ(run_cli(quick_shrink(tmp.file("s"), "1", "1")).code, 0);
  const auto snap = tmp.file("s/snapshot.csv");
  fs::copy_file(snap, tmp.file("copy.csv"));
  const auto r = run_cli({"--seed", "1", "--out", tmp.file("c"), "compare", snap, tmp.file("copy.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ks = csv::read_file(tmp.file("c/ks.csv"));
  ASSERT_EQ(ks.rows.size(), 1U);
  EXPECT_EQ(ks.rows[0][2], "0");
  EXPECT_EQ(ks.rows[0][3], "1");
}

TEST(CliCompare, ThreeSnapshotsGiveAllPairs) {
  TempDir tmp;
  ASSERT_EQ(run_cli(quick_shrink(tmp.file("s"), "1", "1")).code, 0);
  const auto r = run_cli({"--seed", "1", "--out", tmp.file("c"), "--plots", "compare", tmp.file("s/snapshot.csv"),
                      tmp.file("s/initial_sample.csv"), tmp.file("s/snapshot.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(csv::read_file(tmp.file("c/ks.csv")).rows.size(), 3U);
  EXPECT_EQ(csv::read_file(tmp.file("c/compare_summary.csv")).rows.size(), 3U);
  EXPECT_TRUE(fs::exists(tmp.file("c/edf.svg")));

  // shared edges: every snapshot uses the same bins per axis
  std::map<std::string, std::set<std::string>> lowers;
  for (const auto& row : csv::read_file(tmp.file("c/histogram.csv")).rows) lowers[row[1] + row[2]].insert(row[3]);
  for (const auto& [bin, values] : lowers) EXPECT_EQ(values.size(), 1U) << bin;
}

TEST(CliCompare, SnapshotFromOtherSpaceIsConfigError) {
  TempDir tmp;
  ASSERT_EQ(run_cli(quick_shrink(tmp.file("s"), "1", "1")).code, 0);
  const auto r = run_cli({"--seed", "1", "--space", "nasbench101", "--out", tmp.file("c"), "compare",
                      tmp.file("s/snapshot.csv"), tmp.file("s/initial_sample.csv")});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(run_cli({"--seed", "1", "--out", tmp.file("c"), "compare", tmp.file("s/snapshot.csv")}).code, 2);
}

TEST(CliReport, TabulatesRuns) {
  TempDir tmp;
  ASSERT_EQ(run_cli(quick_shrink(tmp.file("s"), "1", "1")).code, 0);
  const auto r = run_cli({"--out", tmp.file("r"), "report", tmp.file("s")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto md = slurp(tmp.file("r/report.md"));
  EXPECT_NE(md.find("| lissnas |"), std::string::npos);
  EXPECT_EQ(run_cli({"--out", tmp.file("r2"), "report", tmp.file("missing")}).code, 2);
}
