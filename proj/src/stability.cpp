// Copyright 2026 The rwre Authors
// SPDX-License-Identifier: Apache-2.0

#include "rwre/stability.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "rwre/error.hpp"

namespace rwre {

MeanAndError mean_and_error(std::span<const double> values) {
  const auto n = static_cast<double>(values.size());
  if (values.empty()) throw InsufficientData("empty sample");
  // Two-pass for stability on samples with a large mean.
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

StabilityDiagnostic diagnose_mean(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < static_cast<std::size_t>(StabilityDiagnostic::kBatches)) {
    throw InsufficientData("stability diagnostic needs at least 8 values");
  }
  StabilityDiagnostic d;
  const double total = std::accumulate(values.begin(), values.end(), 0.0);

  double max_batch = 0.0;
  for (int b = 0; b < StabilityDiagnostic::kBatches; ++b) {
    const std::size_t lo = n * b / StabilityDiagnostic::kBatches;
    const std::size_t hi = n * (b + 1) / StabilityDiagnostic::kBatches;
    max_batch = std::max(max_batch,
                         std::accumulate(values.begin() + lo, values.begin() + hi, 0.0));
  }
  d.max_batch_share = total > 0.0 ? max_batch / total : 0.0;

  const std::size_t half = n / 2;
  const double mean_all = total / static_cast<double>(n);
  const double mean_half =
      std::accumulate(values.begin(), values.begin() + half, 0.0) / static_cast<double>(half);
  d.half_drift = mean_all != 0.0 ? std::abs(mean_half - mean_all) / std::abs(mean_all) : 0.0;

  const auto k = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
  std::vector<double> top(values.begin(), values.end());
  std::nth_element(top.begin(), top.begin() + static_cast<std::ptrdiff_t>(k), top.end(),
                   std::greater<>());
  const double threshold = top[k];
  d.tail_k = static_cast<int>(k);
  if (threshold <= 0.0) {
    d.tail_index = std::numeric_limits<double>::infinity();
    return d;
  }
  double log_sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) log_sum += std::log(top[i] / threshold);
  if (log_sum <= 0.0) {
    d.tail_index = std::numeric_limits<double>::infinity();
    return d;
  }
  d.tail_index = static_cast<double>(k) / log_sum;
  d.tail_index_se = d.tail_index / std::sqrt(static_cast<double>(k));
  return d;
}

}  // namespace rwre
