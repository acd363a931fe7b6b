// Copyright 2026 The rwre Authors
// SPDX-License-Identifier: Apache-2.0

#include "rwre/tree_walk.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <span>

#include <nlohmann/json.hpp>

#include "rwre/error.hpp"

namespace rwre::walk {

int Trajectory::max_level() const {
  return levels.empty() ? 0 : *std::max_element(levels.begin(), levels.end());
}

VertexPath Trajectory::path_of(std::int32_t id) const {
  const auto& v = vertices.at(static_cast<std::size_t>(id));
  if (v.level < 0) return VertexPath::parent_sentinel();
  std::vector<int> digits(static_cast<std::size_t>(v.level));
  for (std::int32_t cur = id; vertices[cur].level > 0; cur = vertices[cur].parent) {
    digits[static_cast<std::size_t>(vertices[cur].level - 1)] = vertices[cur].digit;
  }
  return VertexPath(std::move(digits));
}

std::int32_t Trajectory::find(const VertexPath& v) const {
  const std::uint64_t key = v.key();
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (vertices[i].key == key && vertices[i].level == v.level()) {
      return static_cast<std::int32_t>(i);
    }
  }
  return -1;
}

long Trajectory::visits(const VertexPath& v) const {
  const auto id = find(v);
  return id < 0 ? 0 : vertices[static_cast<std::size_t>(id)].visits;
}

std::vector<long> Trajectory::hitting_times() const {
  std::vector<long> t(static_cast<std::size_t>(std::max(max_level(), 0)) + 1, -1);
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const int l = levels[k];
    if (l >= 0 && t[static_cast<std::size_t>(l)] < 0) t[static_cast<std::size_t>(l)] = static_cast<long>(k);
  }
  return t;
}

Walker::Walker(const env::EnvSpec& spec, const clocks::ClockField& clocks, WalkOptions options)
    : spec_(spec), clocks_(clocks), options_(options), b_(spec.b), stride_(spec.b + 1) {
  spec_.validate();
  const std::int32_t root = add_node(-1, 0, 0, kRootKey);
  if (options_.start_at_sentinel) {
    current_ = ensure_sentinel();
    nodes_[root].first_visit = -1;
  } else {
    current_ = root;
    nodes_[root].visits = 1;
  }
  levels_.push_back(nodes_[current_].level);
  if (options_.record_path) path_.push_back(current_);
}

std::int32_t Walker::add_node(std::int32_t parent, std::int32_t digit, std::int32_t level,
                              std::uint64_t key) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{parent, digit, level, key, steps_, 0});
  children_.insert(children_.end(), static_cast<std::size_t>(b_), -1);
  rates_.insert(rates_.end(), static_cast<std::size_t>(stride_), 0.0);
  sums_.insert(sums_.end(), static_cast<std::size_t>(stride_), 0.0);
  counts_.insert(counts_.end(), static_cast<std::size_t>(stride_), 0U);
  if (level >= 0) initialise(id);
  return id;
}

void Walker::initialise(std::int32_t id) {
  const auto base = static_cast<std::size_t>(id) * static_cast<std::size_t>(stride_);
  const Node& n = nodes_[id];
  std::span<double> rates(rates_.data() + base, static_cast<std::size_t>(stride_));
  rates[0] = 1.0;
  env::sample_weights_into(spec_, n.key, n.level == 0, rates.subspan(1));
  const std::uint64_t parent_key =
      n.level == 0 ? kSentinelKey : nodes_[n.parent].key;
  sums_[base] = clocks_.sample(n.key, parent_key, 0) / rates[0];
  for (int i = 1; i <= b_; ++i) {
    sums_[base + i] = clocks_.sample(n.key, child_key(n.key, i), 0) / rates[i];
  }
}

std::int32_t Walker::ensure_sentinel() {
  if (sentinel_ < 0) sentinel_ = add_node(-1, 0, -1, kSentinelKey);
  return sentinel_;
}

VertexPath Walker::current() const {
  if (at_sentinel()) return VertexPath::parent_sentinel();
  std::vector<int> digits(static_cast<std::size_t>(level()));
  for (std::int32_t cur = current_; nodes_[cur].level > 0; cur = nodes_[cur].parent) {
    digits[static_cast<std::size_t>(nodes_[cur].level - 1)] = nodes_[cur].digit;
  }
  return VertexPath(std::move(digits));
}

int Walker::step() {
  std::int32_t next;
  if (current_ == sentinel_) {
    next = 0;  // the root is always node 0
  } else {
    const auto base = static_cast<std::size_t>(current_) * static_cast<std::size_t>(stride_);
    const double* sums = sums_.data() + base;
    int best = 0;
    for (int j = 1; j < stride_; ++j) {
      if (sums[j] < sums[best]) best = j;
    }
    // add_node may reallocate nodes_, so copy what is needed.
    const std::uint64_t here_key = nodes_[current_].key;
    const std::int32_t here_level = nodes_[current_].level;
    std::uint64_t target_key;
    if (best == 0) {
      next = here_level == 0 ? ensure_sentinel() : nodes_[current_].parent;
      target_key = nodes_[next].key;
    } else {
      const auto slot = static_cast<std::size_t>(current_) * static_cast<std::size_t>(b_) +
                        static_cast<std::size_t>(best - 1);
      target_key = child_key(here_key, best);
      next = children_[slot];
      if (next < 0) {
        next = add_node(current_, best, here_level + 1, target_key);
        children_[slot] = next;
        nodes_[next].first_visit = steps_ + 1;
      }
    }
    const std::uint32_t k = ++counts_[base + static_cast<std::size_t>(best)];
    sums_[base + static_cast<std::size_t>(best)] +=
        clocks_.sample(here_key, target_key, k) / rates_[base + static_cast<std::size_t>(best)];
  }
  ++steps_;
  current_ = next;
  Node& n = nodes_[current_];
  if (n.visits == 0) n.first_visit = steps_;
  ++n.visits;
  levels_.push_back(n.level);
  if (options_.record_path) path_.push_back(current_);
  return n.level;
}

Trajectory Walker::take() && {
  Trajectory t;
  t.levels = std::move(levels_);
  t.path = std::move(path_);
  t.steps_taken = steps_;
  // Renumber so that ids follow the order of first visits.
  std::vector<std::int32_t> order;
  order.reserve(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].visits > 0) order.push_back(static_cast<std::int32_t>(i));
  }
  std::stable_sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
    return nodes_[a].first_visit < nodes_[b].first_visit;
  });
  std::vector<std::int32_t> remap(nodes_.size(), -1);
  for (std::size_t i = 0; i < order.size(); ++i) remap[order[i]] = static_cast<std::int32_t>(i);
  t.vertices.reserve(order.size());
  for (std::int32_t old : order) {
    const Node& n = nodes_[old];
    t.vertices.push_back(VisitedVertex{n.parent >= 0 ? remap[n.parent] : -1, n.digit, n.level,
                                       n.key, n.first_visit, n.visits});
  }
  for (auto& id : t.path) id = remap[id];
  return t;
}

Trajectory Walker::run(StopRule stop) && {
  if (stop.max_level < 1 && stop.max_steps < 1) {
    throw InvalidInput("stop rule needs max_level >= 1 or max_steps >= 1");
  }
  const long max_steps = stop.max_steps < 1 ? kDefaultMaxSteps : stop.max_steps;
  if (stop.max_level > 0) {
    while (level() < stop.max_level && steps_ < max_steps) step();
  } else {
    while (steps_ < max_steps) step();
  }
  const bool truncated = stop.max_level > 0 && level() < stop.max_level;
  Trajectory t = std::move(*this).take();
  t.truncated = truncated;
  return t;
}

Trajectory run_walk(const env::EnvSpec& spec, StopRule stop, WalkOptions options) {
  const auto clocks = clocks::ClockField::for_env(spec);
  return run_walk(spec, clocks, stop, options);
}

Trajectory run_walk(const env::EnvSpec& spec, const clocks::ClockField& clocks, StopRule stop,
                    WalkOptions options) {
  return Walker(spec, clocks, options).run(stop);
}

EscapeEstimate escape_probability(const env::EnvSpec& spec, int n, long trials) {
  if (n < 1) throw InvalidInput("escape_probability needs n >= 1");
  if (trials < 100) throw InvalidInput("escape_probability needs trials >= 100");
  long escaped = 0;
  for (long t = 0; t < trials; ++t) {
    env::EnvSpec local = spec;
    local.seed = derive_seed(spec.seed, StreamTag::kEnvSeed, static_cast<std::uint64_t>(t));
    const clocks::ClockField clocks(
        derive_seed(spec.seed, StreamTag::kClockSeed, static_cast<std::uint64_t>(t)));
    // Started at the root: relative level n is |X| = n, level -1 the sentinel.
    Walker w(local, clocks);
    for (;;) {
      const int l = w.step();
      if (l == n) {
        ++escaped;
        break;
      }
      if (l < 0) break;
    }
  }
  EscapeEstimate e;
  e.n = n;
  e.trials = trials;
  e.probability = static_cast<double>(escaped) / static_cast<double>(trials);
  e.std_error = std::sqrt(e.probability * (1.0 - e.probability) / static_cast<double>(trials));
  e.ci_low = std::max(0.0, e.probability - 2.5758293035489 * e.std_error);
  e.ci_high = std::min(1.0, e.probability + 2.5758293035489 * e.std_error);
  e.scaled = std::pow(static_cast<double>(spec.b), n) * e.probability;
  return e;
}

void write_levels_csv(std::ostream& out, const Trajectory& t, long stride) {
  if (stride < 1) throw InvalidInput("stride must be >= 1");
  out << "step,level\n";
  const long last = static_cast<long>(t.levels.size()) - 1;
  for (long k = 0; k <= last; ++k) {
    if (k % stride == 0 || k == last) out << k << ',' << t.levels[static_cast<std::size_t>(k)] << '\n';
  }
}

std::string summary_json(const Trajectory& t) {
  nlohmann::json j;
  j["steps_taken"] = t.steps_taken;
  j["truncated"] = t.truncated;
  j["max_level"] = t.max_level();
  j["distinct_vertices"] = t.vertices.size();
  j["hitting_times"] = t.hitting_times();
  return j.dump(2);
}

}  // namespace rwre::walk
