// Copyright 2026 The rwre Authors
// SPDX-License-Identifier: Apache-2.0
//
// The field of unit-mean exponential clocks Y(from, to, k), one per oriented
// edge and jump count. Values are computed on demand from the edge keys, so
// the field is never stored.

#pragma once

#include <cstdint>
#include <vector>

#include "rwre/env.hpp"
#include "rwre/vertex.hpp"

namespace rwre::clocks {

struct ClockKey {
  VertexPath from;
  VertexPath to;
  std::uint64_t k = 0;
};

// One consumed clock, recorded by key hashes.
struct ClockAccess {
  std::uint64_t from = 0;
  std::uint64_t to = 0;
  std::uint64_t k = 0;
  friend bool operator==(const ClockAccess&, const ClockAccess&) = default;
};
using ClockAccessLog = std::vector<ClockAccess>;

class ClockField {
 public:
  explicit ClockField(std::uint64_t seed) noexcept
      : seed_(seed), seed_mix_(mix64(seed ^ static_cast<std::uint64_t>(StreamTag::kClock))) {}

  // The clock field paired with an environment in annealed runs.
  static ClockField for_env(const env::EnvSpec& spec) noexcept {
    return ClockField(derive_seed(spec.seed, StreamTag::kClockSeed, 0));
  }

  std::uint64_t seed() const noexcept { return seed_; }

  double sample(std::uint64_t from_key, std::uint64_t to_key, std::uint64_t k) const {
    if (log_) log_->push_back({from_key, to_key, k});
    const std::uint64_t edge = hash_combine(hash_combine(seed_mix_, from_key), to_key);
    return to_unit_exponential(mix64(edge + kGolden * (k + 1)));
  }

  // Throws InvalidInput unless key.from ~ key.to.
  double sample(const ClockKey& key) const;

  // Task-local instrumentation; pass nullptr to stop logging.
  void set_access_log(ClockAccessLog* log) noexcept { log_ = log; }

 private:
  std::uint64_t seed_;
  std::uint64_t seed_mix_;
  ClockAccessLog* log_ = nullptr;
};

// Y(key) under the clock field paired with spec.
double clock_sample(const env::EnvSpec& spec, const ClockKey& key);

// r(from, to): 1 towards the parent, A_{from i} towards child i. The
// sentinel's single edge has rate 1. Throws InvalidInput for non-neighbours.
double jump_rate(const env::EnvSpec& spec, const VertexPath& from, const VertexPath& to);

// The child minimising Y(v, vi, 0) / A_vi; ties go to the lowest digit.
VertexPath first_child(const env::EnvSpec& spec, const ClockField& clocks, const VertexPath& v);
inline VertexPath first_child(const env::EnvSpec& spec, const VertexPath& v) {
  return first_child(spec, ClockField::for_env(spec), v);
}

}  // namespace rwre::clocks
