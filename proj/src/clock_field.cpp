// Copyright 2026 The rwre Authors
// SPDX-License-Identifier: Apache-2.0

#include "rwre/clock_field.hpp"

#include "rwre/error.hpp"

namespace rwre::clocks {

double ClockField::sample(const ClockKey& key) const {
  if (!key.from.is_neighbour_of(key.to)) {
    throw InvalidInput("clock key needs neighbouring vertices: " + key.from.to_string() +
                       " -> " + key.to.to_string());
  }
  return sample(key.from.key(), key.to.key(), key.k);
}

double clock_sample(const env::EnvSpec& spec, const ClockKey& key) {
  return ClockField::for_env(spec).sample(key);
}

double jump_rate(const env::EnvSpec& spec, const VertexPath& from, const VertexPath& to) {
  if (!from.is_neighbour_of(to)) {
    throw InvalidInput("jump_rate needs neighbours: " + from.to_string() + " -> " +
                       to.to_string());
  }
  if (from.is_sentinel() || to.level() < from.level()) return 1.0;
  const int digit = to.digits().back();
  if (digit > spec.b) throw InvalidInput("child digit exceeds b");
  return env::sample_weights(spec, from).a[static_cast<std::size_t>(digit - 1)];
}

VertexPath first_child(const env::EnvSpec& spec, const ClockField& clocks, const VertexPath& v) {
  if (v.is_sentinel()) throw InvalidInput("the sentinel has no first child");
  const auto w = env::sample_weights(spec, v);
  const std::uint64_t key = v.key();
  int best = 1;
  double best_time = 0.0;
  for (int i = 1; i <= spec.b; ++i) {
    const double t = clocks.sample(key, child_key(key, i), 0) / w.a[i - 1];
    if (i == 1 || t < best_time) {
      best = i;
      best_time = t;
    }
  }
  return v.child(best);
}

}  // namespace rwre::clocks
