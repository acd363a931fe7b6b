// Copyright 2026 The rwre Authors
// SPDX-License-Identifier: Apache-2.0
//
// Extensions of the walk to subtrees: the same jump rule as the walk, with
// the competition restricted to neighbours inside the subtree and driven by
// the same clock field. Extensions on edge-disjoint subtrees read disjoint
// parts of the clock field.

#pragma once

#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include "rwre/clock_field.hpp"
#include "rwre/tree_walk.hpp"

namespace rwre::clocks {

class SubtreeSpec {
 public:
  enum class Kind { kFullTree, kLambda, kPath };

  // The whole augmented tree, rooted (and started) at the root.
  static SubtreeSpec full_tree();
  // v, its parent and all descendants of v; rooted at parent(v).
  static SubtreeSpec lambda(const VertexPath& v);
  // The geodesic from `top` down to its descendant `bottom`.
  static SubtreeSpec path(const VertexPath& top, const VertexPath& bottom);

  Kind kind() const noexcept { return kind_; }
  const VertexPath& anchor() const noexcept { return anchor_; }
  // The vertex of least distance to the root; extensions start here.
  VertexPath root() const;
  bool contains(const VertexPath& v) const;
  // Vertices of the path, top first (kPath only).
  std::vector<VertexPath> path_vertices() const;

 private:
  SubtreeSpec(Kind kind, VertexPath anchor, VertexPath top)
      : kind_(kind), anchor_(std::move(anchor)), top_(std::move(top)) {}

  Kind kind_;
  VertexPath anchor_;  // lambda: v; path: bottom
  VertexPath top_;     // path: top
};

// True when the two subtrees have no edge in common.
bool edge_disjoint(const SubtreeSpec& a, const SubtreeSpec& b);

struct ExtensionTrajectory {
  SubtreeSpec subtree = SubtreeSpec::full_tree();
  int b = 0;
  std::vector<std::int32_t> levels;
  std::vector<std::uint64_t> keys;  // vertex key per step
  std::unordered_map<std::uint64_t, long> visit_counts;
  long steps_taken = 0;
  bool truncated = false;
};

ExtensionTrajectory run_extension(const env::EnvSpec& spec, const ClockField& clocks,
                                  const SubtreeSpec& subtree, walk::StopRule stop);
inline ExtensionTrajectory run_extension(const env::EnvSpec& spec, const SubtreeSpec& subtree,
                                         walk::StopRule stop) {
  return run_extension(spec, ClockField::for_env(spec), subtree, stop);
}

// Maps a finished extension to a category.
using ExtensionStatistic = std::function<int(const ExtensionTrajectory&)>;

// Category of the first jump made from the subtree's second vertex:
// 0 for a move towards the root, i for a move to child i.
int second_jump_direction(const ExtensionTrajectory& t);

struct IndependenceReport {
  double chi_square = 0.0;
  int dof = 0;
  double p_value = 1.0;
  long trials = 0;
  std::vector<std::vector<long>> table;
};

// Runs both extensions under `trials` independent (environment, clock)
// seeds derived from spec.seed and tests independence of the statistics.
// Throws InvalidInput when the subtrees share an edge and DegenerateData
// when a statistic takes a single value.
IndependenceReport independence_check(const env::EnvSpec& spec, const SubtreeSpec& a,
                                       const SubtreeSpec& b, long trials,
                                       const ExtensionStatistic& statistic = second_jump_direction,
                                       walk::StopRule stop = {0, 2});

}  // namespace rwre::clocks
