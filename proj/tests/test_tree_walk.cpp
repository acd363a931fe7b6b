// Copyright 2026 The rwre Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rwre/error.hpp"
#include "rwre/tree_walk.hpp"

namespace rwre::walk {
namespace {

using env::EnvSpec;

TEST(Walk, SentinelAlwaysReflectsToRoot) {
  const auto spec = EnvSpec::parse("lerrw:1", 3, 4);
  for (std::uint64_t s = 0; s < 50; ++s) {
    const clocks::ClockField clocks(s);
    Walker w(spec, clocks, {.record_path = false, .start_at_sentinel = true});
    ASSERT_TRUE(w.at_sentinel());
    EXPECT_EQ(w.step(), 0);
    EXPECT_EQ(w.current(), VertexPath::root());
  }
}

TEST(Walk, FirstStepFromRootIsUniformForUnitWeights) {
  const auto spec = EnvSpec::parse("const:1", 4, 0);
  constexpr int n = 100000;
  std::array<long, 5> hits{};
  for (int s = 0; s < n; ++s) {
    const clocks::ClockField clocks(static_cast<std::uint64_t>(s));
    Walker w(spec, clocks);
    w.step();
    const auto v = w.current();
    ++hits[v.is_sentinel() ? 0 : static_cast<std::size_t>(v.digits().back())];
  }
  const double se = std::sqrt(0.2 * 0.8 / n);
  for (long h : hits) EXPECT_NEAR(static_cast<double>(h) / n, 0.2, 3.0 * se);
}

TEST(Walk, DeterministicGivenSpec) {
  const auto spec = EnvSpec::parse("lerrw:1", 4, 99);
  const auto a = run_walk(spec, {200, 100000});
  const auto b = run_walk(spec, {200, 100000});
  EXPECT_EQ(a.levels, b.levels);
  ASSERT_EQ(a.vertices.size(), b.vertices.size());
  for (std::size_t i = 0; i < a.vertices.size(); ++i) {
    EXPECT_EQ(a.vertices[i].key, b.vertices[i].key);
    EXPECT_EQ(a.vertices[i].visits, b.vertices[i].visits);
  }
}

TEST(Walk, TrajectoryInvariants) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto spec = EnvSpec::parse("lerrw:1", 3, seed);
    const auto t = run_walk(spec, {300, 1'000'000});
    ASSERT_EQ(t.levels.front(), 0);
    for (std::size_t i = 1; i < t.levels.size(); ++i) {
      ASSERT_EQ(std::abs(t.levels[i] - t.levels[i - 1]), 1);
    }
    long total = 0;
    std::vector<int> per_level(static_cast<std::size_t>(t.max_level()) + 2, 0);
    for (const auto& v : t.vertices) {
      ASSERT_GE(v.visits, 1);
      total += v.visits;
      ++per_level[static_cast<std::size_t>(v.level + 1)];
    }
    EXPECT_EQ(total, t.steps_taken + 1);
    for (int l = 0; l <= t.max_level(); ++l) EXPECT_GE(per_level[static_cast<std::size_t>(l + 1)], 1);
  }
}

TEST(Walk, StopsAtFirstVisitOfTargetLevel) {
  const auto spec = EnvSpec::parse("lerrw:1", 4, 3);
  const auto t = run_walk(spec, {1, 1000});
  EXPECT_EQ(t.levels.back(), 1);
  EXPECT_FALSE(t.truncated);
  const auto hits = t.hitting_times();
  EXPECT_EQ(hits[1], static_cast<long>(t.levels.size()) - 1);
}

TEST(Walk, StrongDriftIsNearlyBallistic) {
  // A = 1000 on b = 2: a step goes back with probability 1/2001, so the
  // speed is 1999/2001 and T_1000 is about 1001 steps.
  const auto spec = EnvSpec::parse("const:1000", 2, 17);
  const auto t = run_walk(spec, {1000, 100000});
  EXPECT_FALSE(t.truncated);
  const double ratio = static_cast<double>(t.steps_taken) / 1000.0;
  EXPECT_GE(ratio, 1.0);
  EXPECT_LT(ratio, 1.0 + 3.0 * 2001.0 / 1999.0 * 0.01);
}

TEST(Walk, SubThresholdWalkIsTruncated) {
  const auto spec = EnvSpec::parse("const:0.125", 2, 5);
  const auto t = run_walk(spec, {50, 1'000'000});
  EXPECT_TRUE(t.truncated);
  EXPECT_EQ(t.steps_taken, 1'000'000);
  EXPECT_LT(t.max_level(), 50);
}

TEST(Walk, RejectsEmptyStopRule) {
  const auto spec = EnvSpec::parse("const:1", 2, 5);
  EXPECT_THROW(run_walk(spec, {0, 0}), InvalidInput);
}

TEST(Walk, VisitLookupByPath) {
  const auto spec = EnvSpec::parse("lerrw:1", 2, 12);
  const auto t = run_walk(spec, {30, 100000});
  for (std::int32_t id = 0; id < static_cast<std::int32_t>(t.vertices.size()); ++id) {
    const auto path = t.path_of(id);
    ASSERT_EQ(t.find(path), id);
    ASSERT_EQ(t.visits(path), t.vertices[static_cast<std::size_t>(id)].visits);
  }
  VertexPath deep = VertexPath::root();
  for (int i = 0; i < 40; ++i) deep = deep.child(1);
  EXPECT_EQ(t.visits(deep), 0);
  EXPECT_EQ(t.find(deep), -1);
}

TEST(Escape, UnitWeightsBinaryOneLevel) {
  const auto e = escape_probability(EnvSpec::parse("const:1", 2, 1), 1, 20000);
  EXPECT_NEAR(e.probability, 2.0 / 3.0, 3.0 * e.std_error);
  EXPECT_NEAR(e.scaled, 2.0 * e.probability, 1e-12);
  EXPECT_LE(e.ci_low, e.probability);
  EXPECT_GE(e.ci_high, e.probability);
}

TEST(Escape, OneLevelMatchesSingleStepFormula) {
  for (double c : {0.1, 0.5, 3.0}) {
    const int b = 3;
    std::ostringstream law;
    law << "const:" << c;
    const auto e = escape_probability(EnvSpec::parse(law.str(), b, 2), 1, 20000);
    EXPECT_NEAR(e.probability, c * b / (1.0 + c * b), 3.0 * e.std_error) << c;
  }
}

TEST(Escape, PreconditionsAreChecked) {
  const auto spec = EnvSpec::parse("const:1", 2, 1);
  EXPECT_THROW(escape_probability(spec, 0, 1000), InvalidInput);
  EXPECT_THROW(escape_probability(spec, 1, 99), InvalidInput);
}

TEST(Export, LevelsCsvAndSummary) {
  const auto spec = EnvSpec::parse("lerrw:1", 4, 8);
  const auto t = run_walk(spec, {20, 100000});
  std::ostringstream csv;
  write_levels_csv(csv, t, 5);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "step,level");
  long rows = 0;
  std::string last;
  while (std::getline(in, line)) {
    ++rows;
    last = line;
  }
  EXPECT_EQ(last, std::to_string(t.steps_taken) + "," + std::to_string(t.levels.back()));
  EXPECT_EQ(rows, t.steps_taken / 5 + 1 + (t.steps_taken % 5 != 0));

  const auto j = nlohmann::json::parse(summary_json(t));
  EXPECT_EQ(j["steps_taken"].get<long>(), t.steps_taken);
  EXPECT_EQ(j["max_level"].get<int>(), 20);
  EXPECT_EQ(j["hitting_times"].size(), 21U);
}

}  // namespace
}  // namespace rwre::walk
