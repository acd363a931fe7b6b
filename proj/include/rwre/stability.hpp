// Copyright 2026 The rwre Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>

namespace rwre {

// Heuristics for whether a sample mean of nonnegative values is trustworthy.
// Heavy-tailed samples whose population mean is infinite tend to show one
// batch carrying most of the total, a large shift between the first half
// and the full sample, or a Hill tail index at or below one.
struct StabilityDiagnostic {
  static constexpr int kBatches = 8;
  static constexpr double kMaxBatchShare = 0.5;
  static constexpr double kMaxHalfDrift = 0.05;

  double max_batch_share = 0.0;
  // |mean(first half) - mean(all)| / |mean(all)|.
  double half_drift = 0.0;
  // Hill estimate over the top ceil(sqrt(n)) order statistics.
  double tail_index = 0.0;
  double tail_index_se = 0.0;
  int tail_k = 0;

  bool batch_dominated() const noexcept { return max_batch_share > kMaxBatchShare; }
  // Tail index not significantly above 1 (one-sided, z = 2.326).
  bool heavy_tail() const noexcept {
    return tail_index <= 1.0 + 2.326 * tail_index_se;
  }
  bool stable_under_doubling() const noexcept { return half_drift < kMaxHalfDrift; }
  bool suspected_divergence() const noexcept { return batch_dominated() || heavy_tail(); }
};

// Requires every value to be >= 0 and at least kBatches values.
StabilityDiagnostic diagnose_mean(std::span<const double> values);

struct MeanAndError {
  double mean = 0.0;
  double std_error = 0.0;
};
MeanAndError mean_and_error(std::span<const double> values);

}  // namespace rwre
