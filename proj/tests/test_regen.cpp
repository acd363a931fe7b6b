// Copyright 2026 The rwre Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>

#include <sstream>

#include "rwre/error.hpp"
#include "rwre/regen.hpp"
#include "rwre/stats.hpp"
#include "rwre/tree_walk.hpp"

namespace rwre::regen {
namespace {

std::vector<std::int32_t> levels_of(std::initializer_list<int> xs) {
  return {xs.begin(), xs.end()};
}

TEST(Detect, HandTrace) {
  const auto levels = levels_of({0, 1, 0, 1, 2, 3});
  const auto r = detect_regenerations(levels, 0);
  ASSERT_EQ(r.records.size(), 3U);
  EXPECT_EQ(r.records[0].time, 0);
  EXPECT_EQ(r.records[1].time, 4);
  EXPECT_EQ(r.records[1].level, 2);
  EXPECT_EQ(r.records[2].time, 5);
  EXPECT_EQ(r.records[2].level, 3);
  for (const auto& rec : r.records) EXPECT_TRUE(rec.confirmed);
}

TEST(Detect, MonotonePathRegeneratesEveryStep) {
  std::vector<std::int32_t> levels(51);
  for (int i = 0; i <= 50; ++i) levels[static_cast<std::size_t>(i)] = i;
  const auto r = detect_regenerations(levels, 10);
  ASSERT_EQ(r.records.size(), 51U);
  for (int m = 1; m <= 50; ++m) {
    EXPECT_EQ(r.records[static_cast<std::size_t>(m)].time, m);
    EXPECT_EQ(r.records[static_cast<std::size_t>(m)].confirmed, m <= 40);
  }
  EXPECT_EQ(r.confirmed_count(), 41);
}

TEST(Detect, TrivialTrajectories) {
  EXPECT_EQ(detect_regenerations(levels_of({0}), 0).records.size(), 1U);
  EXPECT_EQ(detect_regenerations(std::vector<std::int32_t>{}, 0).records.size(), 1U);
  EXPECT_THROW(detect_regenerations(levels_of({0, 1}), -1), InvalidInput);
}

TEST(Detect, TruncatedRunsKeepOnlyConfirmedRecords) {
  std::vector<std::int32_t> levels(31);
  for (int i = 0; i <= 30; ++i) levels[static_cast<std::size_t>(i)] = i;
  const auto r = detect_regenerations(levels, 5, true);
  EXPECT_TRUE(r.truncated);
  for (const auto& rec : r.records) EXPECT_TRUE(rec.confirmed);
  EXPECT_EQ(r.records.back().level, 25);
}

TEST(Detect, ExcursionBelowKillsDeeperCandidates) {
  // Levels 1 and 2 are fresh maxima, then the walk falls to 0: both die.
  const auto r = detect_regenerations(levels_of({0, 1, 2, 1, 0, 1, 2, 3, 4}), 0);
  ASSERT_EQ(r.records.size(), 3U);
  EXPECT_EQ(r.records[1].level, 3);
  EXPECT_EQ(r.records[1].time, 7);
  EXPECT_EQ(r.records[2].level, 4);
}

TEST(Gaps, Differencing) {
  const std::vector<RegenRecord> recs{{0, 0, 0, true}, {1, 2, 4, true}, {2, 3, 5, true}};
  const auto g = regeneration_gaps(recs, false);
  EXPECT_EQ(g.level_gaps, (std::vector<long>{2, 1}));
  EXPECT_EQ(g.time_gaps, (std::vector<long>{4, 1}));
  const auto h = regeneration_gaps(recs, true);
  EXPECT_EQ(h.level_gaps, (std::vector<long>{1}));
  EXPECT_EQ(h.time_gaps, (std::vector<long>{1}));
}

TEST(Gaps, SkipsUnconfirmedAndChecksCounts) {
  const std::vector<RegenRecord> recs{{0, 0, 0, true}, {1, 2, 4, true}, {2, 3, 5, false}};
  EXPECT_EQ(regeneration_gaps(recs, false).size(), 1U);
  EXPECT_THROW(regeneration_gaps(recs, true), InsufficientData);
  const std::vector<RegenRecord> one{{0, 0, 0, true}};
  EXPECT_THROW(regeneration_gaps(one, false), InsufficientData);
}

TEST(Export, CsvColumns) {
  const std::vector<RegenRecord> recs{{0, 0, 0, true}, {1, 2, 4, false}};
  std::ostringstream out;
  write_records_csv_header(out);
  write_records_csv(out, 7, recs);
  EXPECT_EQ(out.str(), "run_id,m,level,time,confirmed\n7,0,0,0,1\n7,1,2,4,0\n");
}

class WalkRegen : public ::testing::Test {
 protected:
  static walk::Trajectory walk_for(std::uint64_t seed) {
    return walk::run_walk(env::EnvSpec::parse("lerrw:1", 4, seed), {3000, 10'000'000});
  }
};

// A cut level may be re-entered from above, but only through one vertex and
// never left downwards.
TEST_F(WalkRegen, CutLevelsHoldASingleVertex) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto t = walk_for(seed);
    const auto r = detect_regenerations(t.levels, kDefaultGuard);
    std::vector<long> distinct(static_cast<std::size_t>(t.max_level()) + 2, 0);
    for (const auto& v : t.vertices) ++distinct[static_cast<std::size_t>(v.level + 1)];
    ASSERT_GT(r.confirmed_count(), 10);
    for (const auto& rec : r.records) {
      if (rec.m == 0 || !rec.confirmed) continue;
      ASSERT_EQ(distinct[static_cast<std::size_t>(rec.level + 1)], 1) << "level " << rec.level;
      const auto from = t.levels.begin() + rec.time;
      ASSERT_EQ(*std::min_element(from, t.levels.end()), rec.level);
      ASSERT_LT(*std::max_element(t.levels.begin(), from), rec.level);
    }
  }
}

TEST_F(WalkRegen, LevelGapNeverExceedsTimeGap) {
  const auto t = walk_for(11);
  const auto g = regeneration_gaps(detect_regenerations(t.levels).records, true);
  for (std::size_t i = 0; i < g.size(); ++i) ASSERT_LE(g.level_gaps[i], g.time_gaps[i]);
}

TEST_F(WalkRegen, HalvesOfTheGapSampleShareALaw) {
  GapSample all;
  for (std::uint64_t seed = 20; seed < 26; ++seed) {
    const auto t = walk_for(seed);
    all.append(regeneration_gaps(detect_regenerations(t.levels).records, true));
  }
  const std::size_t half = all.size() / 2;
  std::vector<double> a(all.time_gaps.begin(), all.time_gaps.begin() + static_cast<long>(half));
  std::vector<double> b(all.time_gaps.begin() + static_cast<long>(half), all.time_gaps.end());
  EXPECT_GE(stats::ks_two_sample(a, b).p_value, 0.01);
}

TEST_F(WalkRegen, GuardDoublingLeavesGapStatisticsStable) {
  GapSample g1, g2;
  for (std::uint64_t seed = 40; seed < 46; ++seed) {
    const auto t = walk_for(seed);
    g1.append(regeneration_gaps(detect_regenerations(t.levels, 50).records, true));
    g2.append(regeneration_gaps(detect_regenerations(t.levels, 100).records, true));
  }
  const auto s1 = stats::estimate_speed(g1);
  const auto s2 = stats::estimate_speed(g2);
  EXPECT_LT(std::abs(s1.v_hat - s2.v_hat), (s1.ci_high - s1.ci_low) / 2.0);
}

}  // namespace
}  // namespace rwre::regen
