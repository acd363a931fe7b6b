// Copyright 2026 The rwre Authors
// SPDX-License-Identifier: Apache-2.0
//
// Counter-based randomness. Every random quantity in the library is a pure
// function of a 64-bit key obtained by folding (seed, address, tag) through
// a strong 64-bit finalizer; streams that need more than one draw use a
// SplitMix64 engine seeded from such a key.

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace rwre {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// Stafford's "Mix13" finalizer (the SplitMix64 output function).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) noexcept {
  return mix64(h ^ mix64(v + kGolden));
}

template <typename... Rest>
constexpr std::uint64_t hash_words(std::uint64_t first, Rest... rest) noexcept {
  std::uint64_t h = mix64(first + kGolden);
  ((h = hash_combine(h, static_cast<std::uint64_t>(rest))), ...);
  return h;
}

// Stream tags keep the different uses of one seed apart.
enum class StreamTag : std::uint64_t {
  kWeights = 0x57E1'6875,
  kClock = 0xC10C'4B,
  kClockSeed = 0xC5EE'D,
  kWalk = 0x3A1C,
  kEnvSeed = 0xE5EE'D,
  kMonteCarlo = 0x3C3C,
  kRootCondition = 0x2007,
};

// Uniform in the open interval (0, 1) from the top 53 bits.
constexpr double to_unit_open(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

inline double to_unit_exponential(std::uint64_t bits) noexcept {
  return -std::log(to_unit_open(bits));
}

// SplitMix64; satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    state_ += kGolden;
    return mix64(state_);
  }

  double uniform() noexcept { return to_unit_open((*this)()); }

 private:
  std::uint64_t state_;
};

// Seed for the i-th independent replicate under a master seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, StreamTag tag,
                                    std::uint64_t index) noexcept {
  return hash_words(master, static_cast<std::uint64_t>(tag), index);
}

}  // namespace rwre
