#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cli.hpp"

namespace {

const std::string kData = ITERLARA_TEST_DATA;

struct CliRun {
  int rc;
  std::string out;
  std::string err;
};

CliRun cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int rc = iterlara::cli::run_cli(args, out, err);
  return {rc, out.str(), err.str()};
}

std::string data(const std::string& name) { return kData + "/" + name; }

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(Cli, EvalPrintsTable) {
  CliRun r = cli({"eval", data("union_max.il")});
  EXPECT_EQ(r.rc, 0) << r.err;
  EXPECT_EQ(r.out, "c | x  z  y\n0 | 3  6  7\n1 | 4  8  3\n");
}

TEST(Cli, EvalJsonMatchesSnapshot) {
  CliRun r = cli({"--json", "eval", data("union_max.il")});
  ASSERT_EQ(r.rc, 0) << r.err;
  auto got = nlohmann::json::parse(r.out);
  auto want = nlohmann::json::parse(slurp(kData + "/../golden/union_max.json"));
  EXPECT_EQ(got, want);
}

TEST(Cli, EvalExpect) {
  EXPECT_EQ(cli({"eval", data("matmul.il"), "--expect", data("ab.csv")}).rc, 0);
  CliRun bad = cli({"eval", data("matmul.il"), "--expect", data("a.csv")});
  EXPECT_EQ(bad.rc, 1);
  EXPECT_FALSE(bad.err.empty());
}

TEST(Cli, EvalBindsTables) {
  auto dir = std::filesystem::temp_directory_path() / "iterlara_cli_bind";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "s.il") << "agg[plus](V)\n";
  CliRun r = cli({"eval", (dir / "s.il").string(), "--table", "V=" + data("vec.csv")});
  EXPECT_EQ(r.rc, 0) << r.err;
  EXPECT_NE(r.out.find("29"), std::string::npos) << r.out;
  EXPECT_EQ(cli({"eval", (dir / "s.il").string()}).rc, 1);
}

TEST(Cli, OpCount) {
  CliRun r = cli({"op-count", data("matmul.il")});
  EXPECT_EQ(r.rc, 0) << r.err;
  // b.csv holds four zeros, so the exact count falls below the dense 2*2*3*4.
  EXPECT_EQ(r.out.rfind("exact=32 upper_bound=48\n", 0), 0u) << r.out;
  CliRun j = cli({"--json", "op-count", data("matmul.il")});
  auto doc = nlohmann::json::parse(j.out);
  EXPECT_EQ(doc["exact"], 32);
  EXPECT_EQ(doc["upper_bound"], 48);
}

TEST(Cli, MissingFileIsReported) {
  CliRun r = cli({"eval", data("no_such_script.il")});
  EXPECT_EQ(r.rc, 1);
  EXPECT_NE(r.err.find("no_such_script.il"), std::string::npos) << r.err;
  EXPECT_EQ(cli({"frobnicate"}).rc, 1);
}

TEST(Cli, DenseCommands) {
  EXPECT_EQ(cli({"matmul", data("a.csv"), data("b.csv")}).out, slurp(data("ab.csv")));
  EXPECT_EQ(cli({"pool", data("vec.csv"), "-s", "2"}).out, "2,4.5,8\n");
  EXPECT_EQ(cli({"pool", data("vec.csv"), "-s", "2", "--kind", "max"}).out, "3,5,9\n");
  EXPECT_EQ(cli({"pool", data("vec.csv"), "-s", "4"}).rc, 1);
  EXPECT_EQ(cli({"det", data("m3.csv"), "--method", "both"}).out, "12\n");
  auto inv = nlohmann::json::parse(cli({"--json", "inv", data("m3.csv")}).out);
  EXPECT_EQ(inv["rows"], 3);
  EXPECT_NEAR(inv["data"][0][0].get<double>(), 7.0 / 12.0, 1e-12);
  CliRun sing = cli({"inv", data("singular.csv")});
  EXPECT_EQ(sing.rc, 1);
  EXPECT_NE(sing.err.find("Singular"), std::string::npos) << sing.err;
}

TEST(Cli, BfRun) {
  EXPECT_EQ(cli({"bf", "run", data("hi.bf"), "--output", "text"}).out, "Hi");
  EXPECT_EQ(cli({"bf", "run", data("hi.bf")}).out, "72 105\n");
  CliRun both = cli({"bf", "run", data("add.bf"), "--input", "4 5", "--input-format", "numbers", "--via", "both"});
  EXPECT_EQ(both.rc, 0);
  EXPECT_EQ(both.out, "interp: ok  9\nlara:   ok  9\n");
  auto doc = nlohmann::json::parse(
      cli({"--json", "bf", "run", data("add.bf"), "--input", "0405", "--input-format", "hex", "--via", "both"}).out);
  EXPECT_EQ(doc["agree"], true);
  EXPECT_EQ(doc["lara"]["output"], nlohmann::json::array({9}));
  CliRun spin = cli({"--fuel", "50", "bf", "run", data("spin.bf"), "--via", "lara"});
  EXPECT_EQ(spin.rc, 1);
  EXPECT_NE(spin.err.find("FuelExhausted"), std::string::npos) << spin.err;
}

TEST(Cli, BfCompile) {
  CliRun r = cli({"bf", "compile", data("add.bf")});
  EXPECT_EQ(r.rc, 0);
  EXPECT_NE(r.out.find("state_init"), std::string::npos);
  CliRun u = cli({"bf", "compile", data("add.bf"), "--emit", "unicode"});
  EXPECT_EQ(u.rc, 0);
  EXPECT_NE(u.out, r.out);
}

TEST(Cli, TablesDump) {
  auto doc = nlohmann::json::parse(cli({"--json", "tables", "dump", data("a.csv"), data("b.csv")}).out);
  ASSERT_TRUE(doc.contains("a"));
  ASSERT_TRUE(doc.contains("b"));
  EXPECT_EQ(doc["a"]["records"].size(), 6u);
  EXPECT_EQ(doc["b"]["records"].size(), 8u);  // its four zeros are not stored
}
