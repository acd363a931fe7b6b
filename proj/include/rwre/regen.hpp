// Copyright 2026 The rwre Authors
// SPDX-License-Identifier: Apache-2.0
//
// Cut levels: steps k with sup_{j<k}|X_j| < |X_k| <= inf_{j>=k}|X_j|.
// On a finite trajectory the tail infimum is unknown, so candidates closer
// than `guard` levels to the final maximum are reported unconfirmed.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace rwre::regen {

inline constexpr int kDefaultGuard = 100;

struct RegenRecord {
  long m = 0;
  std::int32_t level = 0;
  long time = 0;
  bool confirmed = false;
};

struct RegenResult {
  std::vector<RegenRecord> records;  // records[0] is (0, 0, 0)
  int max_level = 0;
  // Trajectory stopped by the step cap: unconfirmed records were dropped.
  bool truncated = false;

  long confirmed_count() const;
};

// Single pass over the level sequence with a stack of pending candidates.
RegenResult detect_regenerations(std::span<const std::int32_t> levels, int guard = kDefaultGuard,
                                 bool truncated = false);

struct GapSample {
  std::vector<long> level_gaps;
  std::vector<long> time_gaps;
  bool drop_first = false;

  std::size_t size() const noexcept { return level_gaps.size(); }
  // Appends another walk's gaps.
  void append(const GapSample& other);
};

// Differences of consecutive confirmed records. Throws InsufficientData
// with fewer than 2 confirmed records (3 when drop_first).
GapSample regeneration_gaps(std::span<const RegenRecord> records, bool drop_first);

void write_records_csv_header(std::ostream& out);
void write_records_csv(std::ostream& out, long run_id, std::span<const RegenRecord> records);

}  // namespace rwre::regen
