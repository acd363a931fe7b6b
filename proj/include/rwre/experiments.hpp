// Copyright 2026 The rwre Authors
// SPDX-License-Identifier: Apache-2.0
//
// Walk ensembles shared by the command-line driver and the acceptance suite.
// Walk i of an ensemble draws its environment and clocks from
// (spec.seed, offset + i), so results do not depend on the thread count.

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "rwre/clock_field.hpp"
#include "rwre/env.hpp"
#include "rwre/extension.hpp"
#include "rwre/regen.hpp"
#include "rwre/stats.hpp"
#include "rwre/tree_walk.hpp"

namespace rwre::experiments {

env::EnvSpec walk_env(const env::EnvSpec& spec, std::uint64_t index);
clocks::ClockField walk_clocks(const env::EnvSpec& spec, std::uint64_t index);

struct GapCollection {
  regen::GapSample gaps;
  std::vector<double> final_levels;  // one per walk, in walk order
  long walks = 0;
  long confirmed = 0;
  long truncated_walks = 0;
};

// Confirmed regeneration gaps (first block dropped) from `walks` annealed walks.
GapCollection collect_gaps(const env::EnvSpec& spec, long walks, walk::StopRule stop, int guard,
                           int threads, std::uint64_t offset = 0);

// Repeats collect_gaps in batches of `batch` walks until at least
// `min_gaps` gaps are in hand or `max_walks` walks have run.
GapCollection collect_gaps_until(const env::EnvSpec& spec, long min_gaps, long batch,
                                 long max_walks, walk::StopRule stop, int guard, int threads,
                                 std::uint64_t offset = 0);

struct EndpointSample {
  long n = 0;
  std::vector<double> final_levels;
  // Levels at floor(n t) for t in stats::kFcltTimes.
  std::vector<std::array<double, 4>> quarter_levels;
};

EndpointSample sample_endpoints(const env::EnvSpec& spec, long walks, long n, int threads,
                                std::uint64_t offset = 0);

struct CltResult {
  stats::SpeedEstimate speed;
  double finite_n_speed = 0.0;  // mean |X_n| / n on the estimation split
  stats::SigmaEstimate sigma;
  stats::NormalityReport marginal;
  stats::FcltReport fclt;
  long estimation_walks = 0;
  long test_walks = 0;
  long n = 0;
};

// Estimates from one split of `walks` walks of n steps: v and sigma from the
// regeneration gaps, and the finite-n speed mean(|X_n|) / n. On an
// independent split of the same size, the marginal KS test uses
// (|X_n| - finite_n_speed n) / (sigma sqrt(n)), which removes the O(1) offset
// of |X_n| - v n; the increment test uses the regeneration v.
CltResult run_clt(const env::EnvSpec& spec, long walks, long n, int guard, int threads);

struct CouplingCheck {
  long seeds = 0;
  long steps = 0;
  long full_tree_mismatches = 0;
  long lambda_mismatches = 0;
  long lambda_compared = 0;  // (seed, subtree) pairs the walk entered

  bool exact() const noexcept { return full_tree_mismatches == 0 && lambda_mismatches == 0; }
};

// For each seed: full-tree extension against the walk, and the extension on
// the subtrees below the root, its first child and a grandchild against the
// walk's restriction.
CouplingCheck coupling_consistency(const env::EnvSpec& spec, long seeds, long steps, int threads);

struct RootVisitSample {
  std::vector<double> root_visits;        // L at the root, time 0 included
  std::vector<double> first_regen_times;  // tau_1
  long unresolved = 0;                    // walks without a confirmed tau_1
};

// Walks from the root until `escape_level`; counts visits to the root and
// records the first regeneration time.
RootVisitSample sample_root_visits(const env::EnvSpec& spec, long walks, int escape_level,
                                   int guard, int threads, std::uint64_t offset = 0);

}  // namespace rwre::experiments
