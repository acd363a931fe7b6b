// Copyright 2026 The rwre Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "rwre/cli.hpp"
#include "rwre/error.hpp"

namespace rwre::cli {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::path(::testing::TempDir()) / ("rwre_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

ExperimentConfig small(const std::string& name) {
  ExperimentConfig c;
  c.out_dir = fresh_dir(name).string();
  c.walks = 20;
  c.n_steps = 3000;
  c.threads = 2;
  c.trials = 2000;
  return c;
}

TEST(Config, ParsesSectionsAndComments) {
  const auto c = parse_config(
      "# experiment\n"
      "[env]\n"
      "law = gamma:3,1 ; shape, scale\n"
      "b = 2\n"
      "seed = 17\n"
      "\n"
      "[run]\n"
      "walks = 12\n"
      "n_steps = 400\n"
      "[moments]\n"
      "p = 1.5\n"
      "[output]\n"
      "out_dir = somewhere\n");
  EXPECT_EQ(c.law, "gamma:3,1");
  EXPECT_EQ(c.b, 2);
  EXPECT_EQ(c.seed, 17U);
  EXPECT_EQ(c.walks, 12);
  EXPECT_EQ(c.n_steps, 400);
  EXPECT_DOUBLE_EQ(c.p, 1.5);
  EXPECT_EQ(c.out_dir, "somewhere");
  EXPECT_EQ(c.guard, 100);
}

TEST(Config, RejectsUnknownRepeatedAndMalformedKeys) {
  EXPECT_THROW(parse_config("[env]\ncolour = red\n"), ConfigError);
  EXPECT_THROW(parse_config("walks = 3\n"), ConfigError);  // no section
  EXPECT_THROW(parse_config("[env]\nb = 2\nb = 3\n"), ConfigError);
  EXPECT_THROW(parse_config("[run]\nwalks = ten\n"), ConfigError);
  EXPECT_THROW(parse_config("[run]\nwalks = 10x\n"), ConfigError);
  EXPECT_THROW(parse_config("[run\nwalks = 10\n"), ConfigError);
  EXPECT_THROW(parse_config("[run]\nwalks\n"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/rwre.ini"), ConfigError);
}

TEST(Config, ValidationCoversModulePreconditions) {
  auto c = small("validate");
  EXPECT_NO_THROW(c.validate());
  auto bad = c;
  bad.law = "lerrw:0";
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = c;
  bad.walks = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = c;
  bad.envs = 99;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = c;
  bad.epsilon = 1.0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = c;
  bad.n_steps = 0;
  bad.max_level = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Config, HashFollowsTheSettings) {
  ExperimentConfig a;
  ExperimentConfig b;
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.hash().size(), 16U);
  b.seed = 2;
  EXPECT_NE(a.hash(), b.hash());
  // Output location and thread count are not part of the experiment.
  b = a;
  b.out_dir = "elsewhere";
  b.threads = 3;
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(parse_config("[env]\nseed = 1\n").hash(), a.hash());
}

TEST(Command, NamesRoundTrip) {
  for (const auto* name : {"simulate", "regen", "clt", "moments", "coupling", "appendix"}) {
    EXPECT_EQ(to_string(parse_command(name)), name);
  }
  EXPECT_THROW(parse_command("plot"), ConfigError);
}

TEST(Appendix, GridHas396RowsAndExitsZero) {
  const auto c = small("appendix");
  std::ostringstream log;
  EXPECT_EQ(run(Command::kAppendix, c, log), kExitPass);
  const auto csv = slurp(fs::path(c.out_dir) / "appendix.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 397);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "theta,p,exact,bound,holds");
  const auto report = nlohmann::json::parse(slurp(fs::path(c.out_dir) / "report.json"));
  EXPECT_EQ(report["command"], "appendix");
  EXPECT_EQ(report["config_hash"], c.hash());
  EXPECT_TRUE(report["pass"].get<bool>());
  ASSERT_EQ(report["results"].size(), 1U);
  EXPECT_EQ(report["results"][0]["name"], "quenched.geometric_moment_bound");
}

TEST(Coupling, ExitsZero) {
  auto c = small("coupling");
  c.walks = 10;
  c.n_steps = 2000;
  std::ostringstream log;
  EXPECT_EQ(run(Command::kCoupling, c, log), kExitPass) << log.str();
}

TEST(Clt, RefusesWithoutAssumptionA) {
  auto c = small("clt_refuse");
  c.law = "const:1";
  c.b = 1;
  std::ostringstream log;
  EXPECT_EQ(run(Command::kClt, c, log), kExitInvalid);
  EXPECT_NE(log.str().find("Assumption A"), std::string::npos);
  EXPECT_THROW(execute(Command::kClt, c), PreconditionFailed);
}

TEST(Run, InvalidConfigExitsTwo) {
  auto c = small("invalid");
  c.law = "cauchy:1";
  std::ostringstream log;
  EXPECT_EQ(run(Command::kSimulate, c, log), kExitInvalid);
}

TEST(Run, DataProblemExitsOne) {
  auto c = small("too_little");
  c.walks = 1;
  c.n_steps = 50;
  std::ostringstream log;
  EXPECT_EQ(run(Command::kRegen, c, log), kExitFail);
}

TEST(Simulate, WritesOneCsvPerWalk) {
  auto c = small("simulate");
  c.walks = 3;
  c.n_steps = 100;
  c.stride = 10;
  std::ostringstream log;
  EXPECT_EQ(run(Command::kSimulate, c, log), kExitPass);
  for (int i = 0; i < 3; ++i) {
    const auto csv = slurp(fs::path(c.out_dir) / "walks" / ("walk_0000" + std::to_string(i) + ".csv"));
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "step,level");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 12);  // header, 0..100 by 10
  }
}

TEST(Regen, OutputsAreReproducibleAcrossThreadCounts) {
  auto a = small("regen_a");
  auto b = small("regen_b");
  a.threads = 1;
  b.threads = 3;
  std::ostringstream log;
  run(Command::kRegen, a, log);
  run(Command::kRegen, b, log);
  for (const auto* name : {"regenerations.csv", "gaps.csv"}) {
    const auto x = slurp(fs::path(a.out_dir) / name);
    EXPECT_FALSE(x.empty());
    EXPECT_EQ(x, slurp(fs::path(b.out_dir) / name)) << name;
  }
  auto ja = nlohmann::json::parse(slurp(fs::path(a.out_dir) / "report.json"));
  auto jb = nlohmann::json::parse(slurp(fs::path(b.out_dir) / "report.json"));
  ja.erase("created");
  jb.erase("created");
  EXPECT_EQ(ja, jb);
  const auto records = slurp(fs::path(a.out_dir) / "regenerations.csv");
  EXPECT_EQ(records.substr(0, records.find('\n')), "run_id,m,level,time,confirmed");
}

}  // namespace
}  // namespace rwre::cli
