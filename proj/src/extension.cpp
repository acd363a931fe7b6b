// Copyright 2026 The rwre Authors
// SPDX-License-Identifier: Apache-2.0

#include "rwre/extension.hpp"

#include <algorithm>
#include <unordered_set>

#include "rwre/error.hpp"
#include "rwre/stats.hpp"

namespace rwre::clocks {

SubtreeSpec SubtreeSpec::full_tree() {
  return SubtreeSpec(Kind::kFullTree, VertexPath::root(), VertexPath::root());
}

SubtreeSpec SubtreeSpec::lambda(const VertexPath& v) {
  if (v.is_sentinel()) throw InvalidInput("lambda subtree of the sentinel is undefined");
  return SubtreeSpec(Kind::kLambda, v, v.parent());
}

SubtreeSpec SubtreeSpec::path(const VertexPath& top, const VertexPath& bottom) {
  if (!top.is_ancestor_of(bottom) || top == bottom) {
    throw InvalidInput("path subtree needs a strict ancestor on top");
  }
  return SubtreeSpec(Kind::kPath, bottom, top);
}

VertexPath SubtreeSpec::root() const {
  switch (kind_) {
    case Kind::kFullTree: return VertexPath::root();
    case Kind::kLambda:
    case Kind::kPath: return top_;
  }
  return VertexPath::root();
}

bool SubtreeSpec::contains(const VertexPath& v) const {
  switch (kind_) {
    case Kind::kFullTree: return true;
    case Kind::kLambda: return v == top_ || anchor_.is_ancestor_of(v);
    case Kind::kPath: return top_.is_ancestor_of(v) && v.is_ancestor_of(anchor_);
  }
  return false;
}

std::vector<VertexPath> SubtreeSpec::path_vertices() const {
  if (kind_ != Kind::kPath) throw InvalidInput("not a path subtree");
  std::vector<VertexPath> out;
  for (VertexPath v = anchor_;; v = v.parent()) {
    out.push_back(v);
    if (v == top_) break;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

bool edge_disjoint(const SubtreeSpec& a, const SubtreeSpec& b) {
  using Kind = SubtreeSpec::Kind;
  if (a.kind() == Kind::kFullTree || b.kind() == Kind::kFullTree) return false;
  // Every edge is named by its lower endpoint. Lambda(v) owns the lower
  // endpoints "v and its descendants"; a path owns its vertices below top.
  auto lower_endpoints = [](const SubtreeSpec& s) {
    auto vs = s.path_vertices();
    vs.erase(vs.begin());
    return vs;
  };
  if (a.kind() == Kind::kLambda && b.kind() == Kind::kLambda) {
    return !a.anchor().is_ancestor_of(b.anchor()) && !b.anchor().is_ancestor_of(a.anchor());
  }
  if (a.kind() == Kind::kLambda || b.kind() == Kind::kLambda) {
    const auto& lam = a.kind() == Kind::kLambda ? a : b;
    const auto& pth = a.kind() == Kind::kLambda ? b : a;
    for (const auto& v : lower_endpoints(pth)) {
      if (lam.anchor().is_ancestor_of(v)) return false;
    }
    return true;
  }
  const auto la = lower_endpoints(a);
  for (const auto& v : lower_endpoints(b)) {
    if (std::find(la.begin(), la.end(), v) != la.end()) return false;
  }
  return true;
}

namespace {

struct Neighbour {
  std::uint64_t key;
  std::int32_t level;
  double rate;
  double sum;
  std::uint32_t jumps;
};

struct VertexState {
  std::vector<Neighbour> neighbours;  // towards the root first, then children by digit
};

// Lazily builds per-vertex clock state for one extension.
class ExtensionEngine {
 public:
  ExtensionEngine(const env::EnvSpec& spec, const ClockField& clocks, const SubtreeSpec& subtree)
      : spec_(spec), clocks_(clocks), subtree_(subtree) {
    if (subtree.kind() == SubtreeSpec::Kind::kPath) {
      path_ = subtree.path_vertices();
      for (std::size_t i = 0; i < path_.size(); ++i) path_index_[path_[i].key()] = i;
    }
    top_key_ = subtree.root().key();
  }

  // Next vertex from (key, level); updates the clock sums.
  const Neighbour& jump(std::uint64_t key, std::int32_t level, std::uint64_t parent_key) {
    auto it = states_.find(key);
    if (it == states_.end()) it = states_.emplace(key, build(key, level, parent_key)).first;
    auto& nbrs = it->second.neighbours;
    std::size_t best = 0;
    for (std::size_t j = 1; j < nbrs.size(); ++j) {
      if (nbrs[j].sum < nbrs[best].sum) best = j;
    }
    Neighbour& n = nbrs[best];
    if (nbrs.size() > 1) {
      const std::uint32_t k = ++n.jumps;
      n.sum += clocks_.sample(key, n.key, k) / n.rate;
    }
    return n;
  }

 private:
  VertexState build(std::uint64_t key, std::int32_t level, std::uint64_t parent_key) {
    VertexState s;
    const int b = spec_.b;
    auto add_parent = [&] { s.neighbours.push_back({parent_key, level - 1, 1.0, 0.0, 0}); };
    auto add_children = [&](const std::vector<double>& w, int only_digit) {
      for (int i = 1; i <= b; ++i) {
        if (only_digit != 0 && i != only_digit) continue;
        s.neighbours.push_back({child_key(key, i), level + 1, w[static_cast<std::size_t>(i - 1)],
                                0.0, 0});
      }
    };
    if (level < 0) {
      s.neighbours.push_back({kRootKey, 0, 1.0, 0.0, 0});
      return s;
    }
    std::vector<double> w(static_cast<std::size_t>(b));
    env::sample_weights_into(spec_, key, level == 0, w);
    switch (subtree_.kind()) {
      case SubtreeSpec::Kind::kFullTree:
        add_parent();
        add_children(w, 0);
        break;
      case SubtreeSpec::Kind::kLambda:
        if (key == top_key_) {
          add_children(w, subtree_.anchor().digits().back());
        } else {
          add_parent();
          add_children(w, 0);
        }
        break;
      case SubtreeSpec::Kind::kPath: {
        const std::size_t i = path_index_.at(key);
        if (i > 0) add_parent();
        if (i + 1 < path_.size()) add_children(w, path_[i + 1].digits().back());
        break;
      }
    }
    if (s.neighbours.size() > 1) {
      for (auto& n : s.neighbours) n.sum = clocks_.sample(key, n.key, 0) / n.rate;
    }
    return s;
  }

  const env::EnvSpec& spec_;
  const ClockField& clocks_;
  const SubtreeSpec& subtree_;
  std::vector<VertexPath> path_;
  std::unordered_map<std::uint64_t, std::size_t> path_index_;
  std::uint64_t top_key_ = 0;
  std::unordered_map<std::uint64_t, VertexState> states_;
};

}  // namespace

ExtensionTrajectory run_extension(const env::EnvSpec& spec, const ClockField& clocks,
                                  const SubtreeSpec& subtree, walk::StopRule stop) {
  spec.validate();
  if (stop.max_level < 1 && stop.max_steps < 1) {
    throw InvalidInput("stop rule needs max_level >= 1 or max_steps >= 1");
  }
  const long max_steps = stop.max_steps < 1 ? walk::kDefaultMaxSteps : stop.max_steps;
  ExtensionEngine engine(spec, clocks, subtree);
  ExtensionTrajectory t;
  t.subtree = subtree;
  t.b = spec.b;

  const VertexPath start = subtree.root();
  std::uint64_t key = start.key();
  std::int32_t level = start.level();
  // Keys of the ancestors of the current vertex, for the move to the parent.
  std::vector<std::uint64_t> ancestors;
  if (!start.is_sentinel()) {
    VertexPath up = start;
    std::vector<std::uint64_t> chain;
    while (!up.is_sentinel()) {
      up = up.parent();
      chain.push_back(up.key());
    }
    ancestors.assign(chain.rbegin(), chain.rend());
  }
  t.levels.push_back(level);
  t.keys.push_back(key);
  ++t.visit_counts[key];

  while (t.steps_taken < max_steps && (stop.max_level < 1 || level < stop.max_level)) {
    const std::uint64_t parent_key = ancestors.empty() ? 0 : ancestors.back();
    const Neighbour& next = engine.jump(key, level, parent_key);
    if (next.level < level) {
      ancestors.pop_back();
    } else {
      ancestors.push_back(key);
    }
    key = next.key;
    level = next.level;
    ++t.steps_taken;
    t.levels.push_back(level);
    t.keys.push_back(key);
    ++t.visit_counts[key];
  }
  t.truncated = stop.max_level > 0 && level < stop.max_level;
  return t;
}

int second_jump_direction(const ExtensionTrajectory& t) {
  if (t.keys.size() < 3) throw InsufficientData("extension too short for a second jump");
  if (t.levels[2] < t.levels[1]) return 0;
  for (int i = 1; i <= t.b; ++i) {
    if (child_key(t.keys[1], i) == t.keys[2]) return i;
  }
  throw InvalidInput("second jump is not to a neighbour");
}

IndependenceReport independence_check(const env::EnvSpec& spec, const SubtreeSpec& a,
                                       const SubtreeSpec& b, long trials,
                                       const ExtensionStatistic& statistic, walk::StopRule stop) {
  if (!edge_disjoint(a, b)) throw InvalidInput("independence_check needs edge-disjoint subtrees");
  if (trials < 1) throw InvalidInput("independence_check needs trials >= 1");
  std::vector<int> xs(static_cast<std::size_t>(trials));
  std::vector<int> ys(static_cast<std::size_t>(trials));
  for (long i = 0; i < trials; ++i) {
    env::EnvSpec local = spec;
    local.seed = derive_seed(spec.seed, StreamTag::kEnvSeed, static_cast<std::uint64_t>(i));
    const ClockField clocks(derive_seed(spec.seed, StreamTag::kClockSeed, static_cast<std::uint64_t>(i)));
    xs[static_cast<std::size_t>(i)] = statistic(run_extension(local, clocks, a, stop));
    ys[static_cast<std::size_t>(i)] = statistic(run_extension(local, clocks, b, stop));
  }
  const auto test = stats::chi_square_independence(xs, ys);
  IndependenceReport r;
  r.chi_square = test.statistic;
  r.dof = test.dof;
  r.p_value = test.p_value;
  r.trials = trials;
  r.table = test.table;
  return r;
}

}  // namespace rwre::clocks
