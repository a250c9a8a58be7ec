#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string(SIXV_CLI_PATH) + " " + args + " 2>/dev/null";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe)) r.out += buf;
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("sixv_cli_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Cli, InvalidParametersExitTwoWithConstraint) {
  const RunResult r = run("constants --u 1.2 --out " + scratch("invalid").string());
  EXPECT_EQ(r.exit_code, 2);
  const json j = json::parse(r.out);
  EXPECT_EQ(j["status"], "invalid");
  EXPECT_EQ(j["constraint"], "ferroelectric-order");
}

TEST(Cli, ConstantsReportSignsAndSidecar) {
  const fs::path dir = scratch("constants");
  const RunResult r = run("constants --q 0.5 --u 2 --v 0.25 --out " + dir.string());
  ASSERT_EQ(r.exit_code, 0) << r.out;
  const json j = json::parse(slurp(dir / "constants.json"));
  EXPECT_EQ(j["status"], "pass");
  EXPECT_EQ(j["command"], "constants");
  EXPECT_EQ(j["config"]["q"], 0.5);
  EXPECT_EQ(j["config"]["v"], 0.25);
  const json& c = j["results"]["constants"];
  EXPECT_GT(c["a"].get<double>(), 0.0);
  EXPECT_LT(c["b"].get<double>(), 0.0);
  EXPECT_GT(c["c"].get<double>(), 0.0);
  EXPECT_GT(c["d"].get<double>(), 0.0);
  for (const auto& check : j["checks"]) EXPECT_TRUE(check["pass"].get<bool>()) << check.dump();
}

TEST(Cli, IdentitiesPass) {
  const RunResult r = run("identities --out " + scratch("identities").string());
  EXPECT_EQ(r.exit_code, 0) << r.out;
}

TEST(Cli, SampleIsReproducibleAcrossThreadCounts) {
  const fs::path one = scratch("sample1"), four = scratch("sample4");
  const std::string common = "sample --k 2 --M 12 --samples 3000 --seed 7 ";
  ASSERT_EQ(run(common + "--threads 1 --out " + one.string()).exit_code, 0);
  ASSERT_EQ(run(common + "--threads 4 --out " + four.string()).exit_code, 0);
  for (const char* name : {"sample.csv", "sample_grids.json"}) {
    const std::string a = slurp(one / name), b = slurp(four / name);
    EXPECT_FALSE(a.empty()) << name;
    EXPECT_EQ(a, b) << name;
  }
  const json side = json::parse(slurp(one / "sample.json"));
  EXPECT_EQ(side["config"]["seed"], 7);
  EXPECT_EQ(side["config"]["samples"], 3000);
  EXPECT_TRUE(side.contains("wall_clock_seconds"));
  EXPECT_EQ(side["status"], "pass");
}

TEST(Cli, DifferentSeedsGiveDifferentSamples) {
  const fs::path a = scratch("seed_a"), b = scratch("seed_b");
  ASSERT_EQ(run("sample --k 1 --M 10 --samples 500 --seed 1 --out " + a.string()).exit_code, 0);
  ASSERT_EQ(run("sample --k 1 --M 10 --samples 500 --seed 2 --out " + b.string()).exit_code, 0);
  EXPECT_NE(slurp(a / "sample.csv"), slurp(b / "sample.csv"));
}

TEST(Cli, MissingSubcommandFails) {
  EXPECT_NE(run("").exit_code, 0);
}
