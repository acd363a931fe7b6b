// Copyright 2026 The rwre Authors
// SPDX-License-Identifier: Apache-2.0

#include "rwre/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "rwre/error.hpp"
#include "rwre/parallel.hpp"

namespace rwre::experiments {

env::EnvSpec walk_env(const env::EnvSpec& spec, std::uint64_t index) {
  env::EnvSpec local = spec;
  local.seed = derive_seed(spec.seed, StreamTag::kEnvSeed, index);
  return local;
}

clocks::ClockField walk_clocks(const env::EnvSpec& spec, std::uint64_t index) {
  return clocks::ClockField(derive_seed(spec.seed, StreamTag::kClockSeed, index));
}

GapCollection collect_gaps(const env::EnvSpec& spec, long walks, walk::StopRule stop, int guard,
                           int threads, std::uint64_t offset) {
  if (walks < 1) throw InvalidInput("collect_gaps needs walks >= 1");
  struct PerWalk {
    regen::GapSample gaps;
    double final_level = 0.0;
    long confirmed = 0;
    bool truncated = false;
  };
  std::vector<PerWalk> per(static_cast<std::size_t>(walks));
  parallel_for(walks, threads, [&](long i) {
    const auto index = offset + static_cast<std::uint64_t>(i);
    const auto local = walk_env(spec, index);
    const auto clocks = walk_clocks(spec, index);
    const auto t = walk::run_walk(local, clocks, stop);
    const auto r = regen::detect_regenerations(t.levels, guard, t.truncated);
    auto& out = per[static_cast<std::size_t>(i)];
    out.confirmed = r.confirmed_count();
    out.truncated = t.truncated;
    out.final_level = t.levels.back();
    if (r.confirmed_count() >= 3) out.gaps = regen::regeneration_gaps(r.records, true);
  });
  GapCollection c;
  c.walks = walks;
  c.gaps.drop_first = true;
  for (const auto& p : per) {
    c.gaps.append(p.gaps);
    c.final_levels.push_back(p.final_level);
    c.confirmed += p.confirmed;
    c.truncated_walks += p.truncated ? 1 : 0;
  }
  return c;
}

GapCollection collect_gaps_until(const env::EnvSpec& spec, long min_gaps, long batch,
                                 long max_walks, walk::StopRule stop, int guard, int threads,
                                 std::uint64_t offset) {
  if (batch < 1 || max_walks < batch) throw InvalidInput("need 1 <= batch <= max_walks");
  GapCollection total;
  total.gaps.drop_first = true;
  while (static_cast<long>(total.gaps.size()) < min_gaps && total.walks + batch <= max_walks) {
    const auto part = collect_gaps(spec, batch, stop, guard, threads,
                                   offset + static_cast<std::uint64_t>(total.walks));
    total.gaps.append(part.gaps);
    total.final_levels.insert(total.final_levels.end(), part.final_levels.begin(),
                              part.final_levels.end());
    total.walks += part.walks;
    total.confirmed += part.confirmed;
    total.truncated_walks += part.truncated_walks;
  }
  return total;
}

EndpointSample sample_endpoints(const env::EnvSpec& spec, long walks, long n, int threads,
                                std::uint64_t offset) {
  if (walks < 1 || n < 4) throw InvalidInput("sample_endpoints needs walks >= 1 and n >= 4");
  EndpointSample s;
  s.n = n;
  s.final_levels.resize(static_cast<std::size_t>(walks));
  s.quarter_levels.resize(static_cast<std::size_t>(walks));
  std::array<long, 4> marks{};
  for (std::size_t j = 0; j < marks.size(); ++j) {
    marks[j] = static_cast<long>(std::floor(static_cast<double>(n) * stats::kFcltTimes[j]));
  }
  parallel_for(walks, threads, [&](long i) {
    const auto index = offset + static_cast<std::uint64_t>(i);
    const auto local = walk_env(spec, index);
    const auto clocks = walk_clocks(spec, index);
    walk::Walker w(local, clocks);
    auto& q = s.quarter_levels[static_cast<std::size_t>(i)];
    std::size_t next = 0;
    while (next < marks.size()) {
      if (w.steps() == marks[next]) {
        q[next++] = w.level();
        continue;
      }
      w.step();
    }
    s.final_levels[static_cast<std::size_t>(i)] = q.back();
  });
  return s;
}

CltResult run_clt(const env::EnvSpec& spec, long walks, long n, int guard, int threads) {
  CltResult r;
  r.n = n;
  r.estimation_walks = walks;
  r.test_walks = walks;
  const auto c = collect_gaps(spec, walks, {0, n}, guard, threads, 0);
  r.speed = stats::estimate_speed(c.gaps);
  r.sigma = stats::estimate_sigma(c.gaps, r.speed.v_hat);
  double sum = 0.0;
  for (double x : c.final_levels) sum += x;
  r.finite_n_speed = sum / static_cast<double>(c.final_levels.size()) / static_cast<double>(n);
  const auto e = sample_endpoints(spec, walks, n, threads, static_cast<std::uint64_t>(walks));
  std::vector<double> z(e.final_levels.size());
  const double scale = r.sigma.sigma_hat * std::sqrt(static_cast<double>(n));
  for (std::size_t i = 0; i < z.size(); ++i) {
    z[i] = (e.final_levels[i] - r.finite_n_speed * static_cast<double>(n)) / scale;
  }
  r.marginal = stats::ks_normality_test(z);
  r.fclt = stats::fclt_increment_test(e.quarter_levels, n, r.speed.v_hat, r.sigma.sigma_hat);
  return r;
}

namespace {

// Restriction of the walk to `sub`, with repeated stays at the top vertex
// (excursions outside) collapsed; empty if the walk never enters.
std::vector<std::uint64_t> restriction(const walk::Trajectory& t, const VertexPath& v) {
  const std::uint64_t v_key = v.key();
  const VertexPath top = v.parent();
  const std::uint64_t top_key = top.key();
  std::vector<char> inside(t.vertices.size(), 0);
  for (std::size_t i = 0; i < t.vertices.size(); ++i) {
    const auto& u = t.vertices[i];
    const bool is_v = u.key == v_key && u.level == v.level();
    const bool is_top = u.key == top_key && u.level == top.level();
    const bool below = u.parent >= 0 && inside[static_cast<std::size_t>(u.parent)] == 1;
    inside[i] = is_v || below ? 1 : (is_top ? 2 : 0);
  }
  std::vector<std::uint64_t> out;
  bool entered = false;
  for (const auto id : t.path) {
    const char flag = inside[static_cast<std::size_t>(id)];
    if (flag == 0) continue;
    entered = entered || flag == 1;
    const std::uint64_t key = t.vertices[static_cast<std::size_t>(id)].key;
    if (!out.empty() && out.back() == top_key && key == top_key) continue;
    out.push_back(key);
  }
  if (!entered) return {};
  if (out.front() != top_key) out.insert(out.begin(), top_key);
  return out;
}

}  // namespace

CouplingCheck coupling_consistency(const env::EnvSpec& spec, long seeds, long steps, int threads) {
  if (seeds < 1 || steps < 1) throw InvalidInput("coupling check needs seeds, steps >= 1");
  struct PerSeed {
    bool full_ok = true;
    long compared = 0;
    long lambda_bad = 0;
  };
  std::vector<PerSeed> per(static_cast<std::size_t>(seeds));
  parallel_for(seeds, threads, [&](long i) {
    const auto index = static_cast<std::uint64_t>(i);
    const auto local = walk_env(spec, index);
    const auto clocks = walk_clocks(spec, index);
    const auto t = walk::run_walk(local, clocks, {0, steps}, {.record_path = true});
    auto& out = per[static_cast<std::size_t>(i)];

    const auto full = clocks::run_extension(local, clocks, clocks::SubtreeSpec::full_tree(),
                                            {0, steps});
    out.full_ok = full.keys.size() == t.path.size();
    for (std::size_t k = 0; out.full_ok && k < t.path.size(); ++k) {
      out.full_ok = full.keys[k] == t.vertices[static_cast<std::size_t>(t.path[k])].key;
    }

    // The root, the first vertex entered at level 1 and at level 2.
    std::vector<VertexPath> anchors{VertexPath::root()};
    for (int level = 1; level <= 2; ++level) {
      for (std::size_t k = 0; k < t.vertices.size(); ++k) {
        if (t.vertices[k].level == level) {
          anchors.push_back(t.path_of(static_cast<std::int32_t>(k)));
          break;
        }
      }
    }
    for (const auto& v : anchors) {
      const auto restricted = restriction(t, v);
      if (restricted.empty()) continue;
      ++out.compared;
      const auto e = clocks::run_extension(local, clocks, clocks::SubtreeSpec::lambda(v),
                                           {0, static_cast<long>(restricted.size())});
      const bool ok = e.keys.size() >= restricted.size() &&
                      std::equal(restricted.begin(), restricted.end(), e.keys.begin());
      out.lambda_bad += ok ? 0 : 1;
    }
  });
  CouplingCheck c;
  c.seeds = seeds;
  c.steps = steps;
  for (const auto& p : per) {
    c.full_tree_mismatches += p.full_ok ? 0 : 1;
    c.lambda_compared += p.compared;
    c.lambda_mismatches += p.lambda_bad;
  }
  return c;
}

RootVisitSample sample_root_visits(const env::EnvSpec& spec, long walks, int escape_level,
                                   int guard, int threads, std::uint64_t offset) {
  if (walks < 1 || escape_level < 1) throw InvalidInput("need walks >= 1 and escape_level >= 1");
  constexpr long kStepCap = 50'000'000;
  std::vector<double> visits(static_cast<std::size_t>(walks), 0.0);
  std::vector<std::optional<double>> tau(static_cast<std::size_t>(walks));
  parallel_for(walks, threads, [&](long i) {
    const auto index = offset + static_cast<std::uint64_t>(i);
    const auto local = walk_env(spec, index);
    const auto clocks = walk_clocks(spec, index);
    const auto t = walk::run_walk(local, clocks, {escape_level, kStepCap});
    long at_root = 0;
    for (const auto l : t.levels) at_root += l == 0 ? 1 : 0;
    visits[static_cast<std::size_t>(i)] = static_cast<double>(at_root);
    const auto r = regen::detect_regenerations(t.levels, guard, t.truncated);
    if (r.records.size() > 1 && r.records[1].confirmed) {
      tau[static_cast<std::size_t>(i)] = static_cast<double>(r.records[1].time);
    }
  });
  RootVisitSample s;
  s.root_visits = std::move(visits);
  for (const auto& t : tau) {
    if (t) {
      s.first_regen_times.push_back(*t);
    } else {
      ++s.unresolved;
    }
  }
  return s;
}

}  // namespace rwre::experiments
