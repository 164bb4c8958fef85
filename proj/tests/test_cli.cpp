#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "eqflow/config.hpp"
#include "eqflow/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

Outcome cli(const std::string& args) {
  const std::string cmd = std::string(EQFLOW_CLI) + " " + args + " 2>/dev/null";
  Outcome o;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return o;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) o.out.append(buf, n);
  const int status = ::pclose(pipe);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

std::string config(const std::string& name) { return std::string(EQFLOW_CONFIGS) + "/" + name; }

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() /
           ("eqflow_cli_" + std::string(info->name()) + "_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) {
    const auto p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }
  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, CylinderRunIsSteady) {
  const auto r = cli("run --config " + config("c1_cylinder.json") + " --out " + (dir_ / "o").string());
  ASSERT_EQ(r.code, 0) << r.out;
  const auto summary = json::parse(slurp(dir_ / "o" / "summary.json"));
  EXPECT_EQ(summary["termination"], "steady");
  EXPECT_EQ(summary["steps"], 0);
  for (const char* f : {"run.csv", "final_profile.csv", "final_geometry.csv"})
    EXPECT_TRUE(fs::exists(dir_ / "o" / f)) << f;
  EXPECT_EQ(json::parse(r.out)["termination"], "steady");
}

TEST_F(Cli, PinchExitsWithSingularCode) {
  const auto r = cli("run --config " + config("c1_pinch.json") + " --out " + (dir_ / "o").string());
  EXPECT_EQ(r.code, 2);
  const auto summary = json::parse(slurp(dir_ / "o" / "summary.json"));
  EXPECT_EQ(summary["termination"], "singular_axis");
  EXPECT_EQ(summary["detail"], "r_min -> 0");
}

TEST_F(Cli, RerunsAreByteIdentical) {
  const auto cfg = write("c.json", R"({
    "space": {"case": "C1", "n": 2}, "slab": {"a": 0, "b": 1},
    "initial": {"kind": "perturbed", "R": 1, "epsilon": 0.1}, "grid": {"N": 60},
    "flow": {"T_max": 0.05}, "output": {"snapshot_every": 10}})");
  ASSERT_EQ(cli("run --config " + cfg + " --out " + (dir_ / "a").string()).code, 0);
  ASSERT_EQ(cli("run --config " + cfg + " --out " + (dir_ / "b").string()).code, 0);
  for (const char* f : {"run.csv", "final_profile.csv", "final_geometry.csv", "profile_10.csv"}) {
    ASSERT_TRUE(fs::exists(dir_ / "a" / f)) << f;
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  }
  const auto run = slurp(dir_ / "a" / "run.csv");
  EXPECT_EQ(run.substr(0, run.find('\n')), eqflow::kRunCsvHeader);
}

TEST_F(Cli, UnwritableOutputExitsWithIoCode) {
  const auto blocker = write("blocker", "x");
  const auto r = cli("run --config " + config("c1_cylinder.json") + " --out " + blocker + "/sub");
  EXPECT_EQ(r.code, 4);
}

TEST_F(Cli, ConfigErrorsExitWithCodeOne) {
  const auto bad = write("bad.json", R"({
    "space": {"case": "C3", "lambda": 1, "n": 2}, "slab": {"a": -1, "b": 1},
    "initial": {"kind": "cylinder", "R": 1}, "grid": {"N": 100}})");
  EXPECT_EQ(cli("run --config " + bad).code, 1);
  EXPECT_EQ(cli("verify-curvature --config " + bad).code, 1);
  EXPECT_EQ(cli("bounds --config " + (dir_ / "missing.json").string()).code, 1);
  EXPECT_EQ(cli("run").code, 1);
  EXPECT_EQ(cli("appendix-b --case C1").code, 1);
}

TEST_F(Cli, VerifyCurvatureOnSpaceForm) {
  const auto r = cli("verify-curvature --config " + config("c3_verify.json"));
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = json::parse(r.out);
  EXPECT_LE(j["max_deviation"].get<double>(), 1e-9);
  EXPECT_EQ(j["points"], 1000);
}

TEST_F(Cli, VerifyCurvatureFlagsNonSpaceForms) {
  const auto cfg = write("c.json", R"({
    "space": {"case": "C3", "lambda": -1, "lambda_h": -2, "n": 2}, "slab": {"a": -1, "b": 1},
    "initial": {"kind": "cylinder", "R": 1}, "grid": {"N": 100}})");
  EXPECT_EQ(cli("verify-curvature --config " + cfg).code, 5);
}

TEST_F(Cli, BoundsMatchLibrary) {
  const auto r = cli("bounds --config " + config("c1_bounds.json"));
  ASSERT_EQ(r.code, 0);
  const auto j = json::parse(r.out);
  const auto sp = eqflow::AmbientSpace::make(eqflow::ModelCase::C1, 0.0, 2);
  const eqflow::GraphProfile p(0.0, 1.0, std::vector<double>(1001, 1.0));
  EXPECT_EQ(j, eqflow::to_json(eqflow::compute_bounds(sp, p)));
  EXPECT_NEAR(j["V"].get<double>(), eqflow::kPi, 1e-12);
  EXPECT_NEAR(j["r2"].get<double>(), std::sqrt(3.0), 1e-12);
}

TEST_F(Cli, AppendixBWritesReport) {
  const auto r = cli("appendix-b --case C2 --samples 10000 --out " + dir_.string());
  ASSERT_EQ(r.code, 0);
  const auto j = json::parse(r.out);
  EXPECT_NEAR(j["normalized"].get<double>() / -1.55553, 1.0, 1e-3);
  EXPECT_FALSE(j.contains("lambda_sweep"));
  EXPECT_TRUE(fs::exists(dir_ / "appendix_b_C2.json"));
  const auto csv = slurp(dir_ / "cycloid_C2.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "s,z,r");
}

TEST_F(Cli, AppendixBLambdaSweepOnMismatch) {
  const auto r = cli("appendix-b --case C5 --lambda -2 --samples 2000");
  ASSERT_EQ(r.code, 0);
  const auto j = json::parse(r.out);
  ASSERT_TRUE(j.contains("lambda_sweep"));
  EXPECT_EQ(j["lambda_sweep"].size(), 5u);
}

TEST_F(Cli, SweepRunsEveryVariant) {
  const auto r = cli("sweep --config " + config("sweep_base.json") + " --variants " +
                     config("sweep_variants.json") + " --jobs 2 --out " + dir_.string());
  ASSERT_EQ(r.code, 0) << r.out;
  const auto table = json::parse(slurp(dir_ / "sweep.json"));
  ASSERT_EQ(table.size(), 3u);
  for (int k = 0; k < 3; ++k) {
    EXPECT_EQ(table[k]["exit"], 0);
    EXPECT_TRUE(fs::exists(dir_ / ("run_" + std::to_string(k)) / "run.csv"));
  }
  EXPECT_EQ(table[2]["summary"]["config"]["space"]["n"], 3);
}

TEST_F(Cli, SweepValidatesBeforeRunning) {
  const auto v = write("v.json", R"([{"grid": {"N": 2}}, {"initial": {"epsilon": 0.1}}])");
  EXPECT_EQ(cli("sweep --config " + config("sweep_base.json") + " --variants " + v + " --out " +
                dir_.string())
                .code,
            1);
  EXPECT_FALSE(fs::exists(dir_ / "run_1"));
}
