#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "fixprox/cli.hpp"

namespace fs = std::filesystem;
using fixprox::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = fixprox::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("fixprox_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
             "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

const std::vector<std::string> kSmallBench{"bench", "--N", "6", "--I", "3", "--K", "2",
                                           "--samples", "2", "--max-iters", "40", "--seed", "5"};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

TEST(Cli, ValidateSchedule) {
  auto ok = cli({"validate-schedule", "--mode", "halpern", "--gamma-exp", "0.25", "--alpha-exp", "0.5"});
  EXPECT_EQ(ok.code, 0);
  EXPECT_EQ(ok.out, "valid\n");
  auto bad = cli({"validate-schedule", "--mode", "halpern", "--gamma-exp", "0.3", "--alpha-exp", "0.2"});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.out.find("b ≤ a"), std::string::npos);
  EXPECT_EQ(cli({"validate-schedule", "--mode", "km", "--gamma-exp", "0.25", "--alpha-const", "0.5"}).code, 0);
  EXPECT_EQ(cli({"validate-schedule", "--mode", "km", "--gamma-exp", "1.5", "--alpha-const", "0.5"}).code, 1);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli({}).code, 1);
  EXPECT_EQ(cli({"bench", "--bogus"}).code, 1);
  EXPECT_EQ(cli({"frobnicate"}).code, 1);
  const auto r = cli({"bench", "--regime", "sideways"});
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(r.err.empty());
  EXPECT_EQ(count_lines(r.err), 1u);
  EXPECT_EQ(cli({"bench", "--algorithms", "newton"}).code, 1);
  EXPECT_EQ(cli({"bench", "--config", "/nonexistent/fixprox.cfg"}).code, 1);
  EXPECT_EQ(cli({"run", "--instance", "/nonexistent.json"}).code, 1);
}

TEST(Cli, HelpListsEveryFlag) {
  const auto r = cli({"bench", "--help"});
  EXPECT_EQ(r.code, 0);
  for (const char* flag : {"--config", "--preset", "--N", "--I", "--K", "--samples", "--max-iters",
                           "--regime", "--algorithms", "--variants", "--seed", "--stop-f-tol",
                           "--stop-d-tol", "--jobs", "--out", "--format", "--dump-instances",
                           "--no-timing"}) {
    EXPECT_NE(r.out.find(flag), std::string::npos) << flag;
  }
  const auto top = cli({"--help"});
  EXPECT_EQ(top.code, 0);
  for (const char* sub : {"bench", "run", "validate-schedule", "oracle"}) {
    EXPECT_NE(top.out.find(sub), std::string::npos) << sub;
  }
}

TEST(Cli, BenchCsv) {
  auto args = kSmallBench;
  const auto r = cli(args);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_lines(r.out), 9u);
  EXPECT_EQ(r.out.rfind("algorithm,variant,n_F,time_F_s,F_n,n_D,time_D_s,D_n\n", 0), 0u);

  args.insert(args.end(), {"--algorithms", "km,psm", "--variants", "ii", "--no-timing"});
  const auto sub = cli(args);
  ASSERT_EQ(sub.code, 0) << sub.err;
  EXPECT_EQ(count_lines(sub.out), 3u);
  EXPECT_NE(sub.out.find("km,ii,"), std::string::npos);
  EXPECT_NE(sub.out.find("psm,ii,"), std::string::npos);
  EXPECT_EQ(sub.out, cli(args).out);
}

TEST(Cli, BenchJsonAndOutFile) {
  TempDir dir;
  auto args = kSmallBench;
  const auto path = (dir.path() / "report.json").string();
  args.insert(args.end(), {"--format", "json", "--out", path});
  const auto r = cli(args);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  const json j = json::parse(slurp(path));
  EXPECT_EQ(j.at("rows").size(), 8u);
  EXPECT_EQ(j.at("config").at("N"), 6);
  EXPECT_EQ(j.at("rows")[0].at("F").size(), 41u);
  EXPECT_TRUE(j.at("paired").get<bool>());
}

TEST(Cli, ConfigFileAndOverride) {
  TempDir dir;
  const auto cfg = dir.path() / "bench.cfg";
  std::ofstream(cfg) << "# small run\nN = 6\nI=3\nK=2\nsamples=2\nmax-iters=40\nseed=5\n"
                        "algorithms=km\nvariants=i\nno-timing=true\n";
  const auto from_file = cli({"bench", "--config", cfg.string()});
  ASSERT_EQ(from_file.code, 0) << from_file.err;
  EXPECT_EQ(count_lines(from_file.out), 2u);

  auto inline_args = kSmallBench;
  inline_args.insert(inline_args.end(), {"--algorithms", "km", "--variants", "i", "--no-timing"});
  EXPECT_EQ(from_file.out, cli(inline_args).out);

  const auto overridden = cli({"bench", "--config", cfg.string(), "--seed", "6"});
  ASSERT_EQ(overridden.code, 0);
  inline_args[12] = "6";
  EXPECT_EQ(overridden.out, cli(inline_args).out);
  EXPECT_NE(overridden.out, from_file.out);

  std::ofstream(dir.path() / "bad.cfg") << "colour=blue\n";
  EXPECT_EQ(cli({"bench", "--config", (dir.path() / "bad.cfg").string()}).code, 1);
  std::ofstream(dir.path() / "worse.cfg") << "just some words\n";
  EXPECT_EQ(cli({"bench", "--config", (dir.path() / "worse.cfg").string()}).code, 1);
}

TEST(Cli, SeedFromEnvironment) {
  auto args = std::vector<std::string>(kSmallBench.begin(), kSmallBench.end() - 2);
  args.push_back("--no-timing");
  ::setenv("FIXPROX_SEED", "5", 1);
  const auto env = cli(args);
  ::unsetenv("FIXPROX_SEED");
  auto explicit_args = kSmallBench;
  explicit_args.push_back("--no-timing");
  ASSERT_EQ(env.code, 0);
  EXPECT_EQ(env.out, cli(explicit_args).out);
}

TEST(Cli, DumpedInstancesReplayBitwise) {
  TempDir dir;
  auto args = kSmallBench;
  args.insert(args.end(), {"--dump-instances", dir.path().string(), "--regime", "infeasible"});
  ASSERT_EQ(cli(args).code, 0);
  for (int s = 0; s < 2; ++s) {
    const auto file = dir.path() / ("sample_000" + std::to_string(s) + ".json");
    ASSERT_TRUE(fs::exists(file));
    const json inst = json::parse(slurp(file));
    ASSERT_EQ(inst.at("runs").size(), 8u);
    for (const auto& run : inst.at("runs")) {
      std::vector<std::string> r{"run", "--instance", file.string(), "--algorithm",
                                 run.at("algorithm").get<std::string>(), "--max-iters", "40",
                                 "--gamma-scale", num(run.at("gamma").at("scale")),
                                 "--gamma-exp", num(run.at("gamma").at("exponent"))};
      const auto& alpha = run.at("alpha");
      if (alpha.at("type") == "power_law") {
        r.insert(r.end(), {"--alpha-scale", num(alpha.at("scale")), "--alpha-exp",
                           num(alpha.at("exponent"))});
      } else {
        r.insert(r.end(), {"--alpha-const", num(alpha.at("value"))});
      }
      const auto out = cli(r);
      ASSERT_EQ(out.code, 0) << out.err;
      const json trace = json::parse(out.out);
      EXPECT_EQ(trace.at("objective"), run.at("objective"));
      EXPECT_EQ(trace.at("residual"), run.at("residual"));
    }
  }
}

TEST(Cli, RunOptions) {
  TempDir dir;
  auto args = kSmallBench;
  args.insert(args.end(), {"--dump-instances", dir.path().string()});
  ASSERT_EQ(cli(args).code, 0);
  const auto file = (dir.path() / "sample_0000.json").string();

  const auto mon = cli({"run", "--instance", file, "--algorithm", "km", "--max-iters", "20",
                        "--monitor", "--record-iterates", "--no-timing"});
  ASSERT_EQ(mon.code, 0) << mon.err;
  const json j = json::parse(mon.out);
  EXPECT_EQ(j.at("iterates").size(), 21u);
  EXPECT_EQ(j.at("monitors").size(), 20u);
  EXPECT_FALSE(j.contains("time_s"));
  for (const auto& m : j.at("monitors")) {
    EXPECT_LE(m.at("prox_gap").get<double>(), 1e-9);
    EXPECT_LE(m.at("descent_gap").get<double>(), 1e-9);
  }

  EXPECT_EQ(cli({"run", "--instance", file, "--algorithm", "km", "--alpha-const", "1"}).code, 1);
  EXPECT_EQ(cli({"run", "--instance", file, "--algorithm", "km", "--alpha-const", "1",
                 "--unchecked-schedules", "--max-iters", "3"}).code, 0);
  const auto seeded = cli({"run", "--instance", file, "--algorithm", "halpern", "--x0-seed", "3",
                           "--max-iters", "5", "--shuffle-seed", "9"});
  EXPECT_EQ(seeded.code, 0) << seeded.err;

  const auto out_path = (dir.path() / "trace.json").string();
  EXPECT_EQ(cli({"run", "--instance", file, "--max-iters", "4", "--out", out_path}).code, 0);
  EXPECT_EQ(json::parse(slurp(out_path)).at("objective").size(), 5u);
}

TEST(Cli, NumericFailureExitsTwo) {
  TempDir dir;
  // The half-space projection overflows to NaN at these magnitudes.
  const char* inst = R"({
    "format": "fixprox-instance", "version": 1, "dim": 1, "x0": [1e200],
    "users": [{
      "f": {"type": "weighted_shifted_l1", "weights": [1.0], "shifts": [0.0]},
      "T": {"type": "projection", "set": {"type": "halfspace", "normal": [1e200], "offset": 0.0}},
      "anchor": [0.0]
    }]
  })";
  const auto file = (dir.path() / "blowup.json").string();
  std::ofstream(file) << inst;
  const auto r = cli({"run", "--instance", file, "--algorithm", "km", "--max-iters", "3"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("iteration 0"), std::string::npos);
}

TEST(Cli, Oracle) {
  TempDir dir;
  const char* inst = R"({
    "format": "fixprox-instance", "version": 1, "dim": 1,
    "users": [{
      "f": {"type": "weighted_shifted_l1", "weights": [1.0], "shifts": [3.0]},
      "T": {"type": "half_averaged", "inner": {
        "type": "compose",
        "outer": {"type": "projection", "set": {"type": "ball", "center": [0.0], "radius": 1.0}},
        "inner": {"type": "weighted_average", "weights": [1.0], "terms": [
          {"type": "projection", "set": {"type": "halfspace", "normal": [1.0], "offset": 0.5}}]}}},
      "anchor": [0.0],
      "bounding": {"type": "ball", "center": [0.0], "radius": 1.0}
    }]
  })";
  const auto file = (dir.path() / "line.json").string();
  std::ofstream(file) << inst;
  const auto r = cli({"oracle", "--instance", file, "--lo", "-2", "--hi", "2", "--step", "0.001"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_NEAR(j.at("point")[0].get<double>(), 0.5, 3e-4);
  EXPECT_NEAR(j.at("value").get<double>(), 2.5, 3e-4);

  const auto run = cli({"run", "--instance", file, "--algorithm", "halpern", "--gamma-exp", "0.125",
                        "--alpha-scale", "0.001", "--alpha-exp", "0.75", "--max-iters", "20000",
                        "--x0-seed", "1", "--no-timing"});
  ASSERT_EQ(run.code, 0) << run.err;
  EXPECT_NEAR(json::parse(run.out).at("final_iterate")[0].get<double>(), 0.5, 1e-2);

  std::ofstream(dir.path() / "broken.json") << "{\"format\": ";
  EXPECT_EQ(cli({"oracle", "--instance", (dir.path() / "broken.json").string()}).code, 1);
}
