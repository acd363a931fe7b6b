// Copyright 2026 The rwre Authors
// SPDX-License-Identifier: Apache-2.0
//
// The random walk on the lazily generated tree. Vertices are materialised
// on first visit; each step is decided by the exponential clock field, so
// the walk coincides with its extensions on subtrees.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rwre/clock_field.hpp"
#include "rwre/env.hpp"
#include "rwre/vertex.hpp"

namespace rwre::walk {

inline constexpr long kDefaultMaxSteps = 100'000'000;

struct StopRule {
  int max_level = 0;  // 0: no level target
  long max_steps = kDefaultMaxSteps;
};

// One visited vertex; ids are assigned in order of first visit.
struct VisitedVertex {
  std::int32_t parent = -1;  // id of the parent, -1 for root and sentinel
  std::int32_t digit = 0;    // 1-based child digit, 0 for root and sentinel
  std::int32_t level = 0;
  std::uint64_t key = 0;
  long first_visit = 0;  // step index of the first visit
  long visits = 0;
};

struct Trajectory {
  std::vector<std::int32_t> levels;      // |X_0|, ..., |X_T|
  std::vector<VisitedVertex> vertices;   // fresh-vertex log with visit counts
  std::vector<std::int32_t> path;        // vertex id per step, if recorded
  long steps_taken = 0;
  bool truncated = false;                // max_steps hit before max_level

  int max_level() const;
  VertexPath path_of(std::int32_t id) const;
  // Id of a visited vertex, or -1.
  std::int32_t find(const VertexPath& v) const;
  long visits(const VertexPath& v) const;
  // T_n = first step with |X| = n, or -1 if never reached.
  std::vector<long> hitting_times() const;
};

struct WalkOptions {
  bool record_path = false;
  bool start_at_sentinel = false;
};

class Walker {
 public:
  Walker(const env::EnvSpec& spec, const clocks::ClockField& clocks, WalkOptions options = {});

  int level() const noexcept { return nodes_[current_].level; }
  long steps() const noexcept { return steps_; }
  std::int32_t current_id() const noexcept { return current_; }
  VertexPath current() const;
  std::uint64_t current_key() const noexcept { return nodes_[current_].key; }
  bool at_sentinel() const noexcept { return current_ == sentinel_; }

  // One jump; returns the new level.
  int step();
  // Runs until the stop rule fires and hands over the record.
  Trajectory run(StopRule stop) &&;
  // Releases the record accumulated so far.
  Trajectory take() &&;

 private:
  struct Node {
    std::int32_t parent;
    std::int32_t digit;
    std::int32_t level;
    std::uint64_t key;
    long first_visit;
    long visits;
  };

  std::int32_t add_node(std::int32_t parent, std::int32_t digit, std::int32_t level,
                        std::uint64_t key);
  void initialise(std::int32_t id);
  std::int32_t ensure_sentinel();

  const env::EnvSpec& spec_;
  const clocks::ClockField& clocks_;
  WalkOptions options_;
  int b_;
  int stride_;  // b + 1 neighbours: slot 0 parent, slot i child i
  std::vector<Node> nodes_;
  std::vector<std::int32_t> children_;  // b per node, -1 if unvisited
  std::vector<double> rates_;           // stride per node
  std::vector<double> sums_;            // cumulative clock/rate per neighbour
  std::vector<std::uint32_t> counts_;   // jumps along each oriented edge
  std::vector<std::int32_t> levels_;
  std::vector<std::int32_t> path_;
  std::int32_t current_ = 0;
  std::int32_t sentinel_ = -1;
  long steps_ = 0;
};

Trajectory run_walk(const env::EnvSpec& spec, StopRule stop, WalkOptions options = {});
Trajectory run_walk(const env::EnvSpec& spec, const clocks::ClockField& clocks, StopRule stop,
                    WalkOptions options = {});

struct EscapeEstimate {
  int n = 0;
  long trials = 0;
  double probability = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;  // 99% normal interval
  double ci_high = 0.0;
  double scaled = 0.0;  // b^n * probability
};

// Annealed probability that a walk started at a vertex reaches relative
// level n before the vertex's parent. Trial t uses environment and clocks
// derived from (spec.seed, t).
EscapeEstimate escape_probability(const env::EnvSpec& spec, int n, long trials);

// CSV "step,level" keeping every stride-th step and the last one.
void write_levels_csv(std::ostream& out, const Trajectory& t, long stride);
// JSON summary with steps, truncation and the T_n table.
std::string summary_json(const Trajectory& t);

}  // namespace rwre::walk
