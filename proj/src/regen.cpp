// Copyright 2026 The rwre Authors
// SPDX-License-Identifier: Apache-2.0

#include "rwre/regen.hpp"

#include <algorithm>
#include <ostream>

#include "rwre/error.hpp"

namespace rwre::regen {

long RegenResult::confirmed_count() const {
  return std::count_if(records.begin(), records.end(),
                       [](const RegenRecord& r) { return r.confirmed; });
}

RegenResult detect_regenerations(std::span<const std::int32_t> levels, int guard, bool truncated) {
  if (guard < 0) throw InvalidInput("guard must be >= 0");
  RegenResult result;
  result.truncated = truncated;
  result.records.push_back({0, 0, 0, true});
  if (levels.size() < 2) return result;

  struct Candidate {
    long time;
    std::int32_t level;
  };
  std::vector<Candidate> stack;
  std::int32_t running_max = levels[0];
  for (std::size_t k = 1; k < levels.size(); ++k) {
    const std::int32_t x = levels[k];
    if (x > running_max) {
      running_max = x;
      stack.push_back({static_cast<long>(k), x});
    } else {
      while (!stack.empty() && stack.back().level > x) stack.pop_back();
    }
  }
  result.max_level = std::max(running_max, 0);

  const long line = static_cast<long>(result.max_level) - guard;
  long m = 0;
  for (const auto& c : stack) {
    const bool confirmed = c.level <= line;
    if (!confirmed && truncated) break;
    result.records.push_back({++m, c.level, c.time, confirmed});
  }
  return result;
}

void GapSample::append(const GapSample& other) {
  level_gaps.insert(level_gaps.end(), other.level_gaps.begin(), other.level_gaps.end());
  time_gaps.insert(time_gaps.end(), other.time_gaps.begin(), other.time_gaps.end());
}

GapSample regeneration_gaps(std::span<const RegenRecord> records, bool drop_first) {
  std::vector<const RegenRecord*> confirmed;
  for (const auto& r : records) {
    if (r.confirmed) confirmed.push_back(&r);
  }
  const std::size_t needed = drop_first ? 3 : 2;
  if (confirmed.size() < needed) {
    throw InsufficientData("need at least " + std::to_string(needed) + " confirmed records, got " +
                           std::to_string(confirmed.size()));
  }
  GapSample g;
  g.drop_first = drop_first;
  for (std::size_t i = drop_first ? 2 : 1; i < confirmed.size(); ++i) {
    g.level_gaps.push_back(confirmed[i]->level - confirmed[i - 1]->level);
    g.time_gaps.push_back(confirmed[i]->time - confirmed[i - 1]->time);
  }
  return g;
}

void write_records_csv_header(std::ostream& out) { out << "run_id,m,level,time,confirmed\n"; }

void write_records_csv(std::ostream& out, long run_id, std::span<const RegenRecord> records) {
  for (const auto& r : records) {
    out << run_id << ',' << r.m << ',' << r.level << ',' << r.time << ',' << (r.confirmed ? 1 : 0)
        << '\n';
  }
}

}  // namespace rwre::regen
