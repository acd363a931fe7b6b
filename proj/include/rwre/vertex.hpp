// Copyright 2026 The rwre Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "rwre/hash.hpp"

namespace rwre {

// Addresses are hashed incrementally along the path from the root, so a
// vertex key is a pure function of the vertex and costs O(1) to extend.
inline constexpr std::uint64_t kRootKey = 0x2B0077'0000'0001ULL;
inline constexpr std::uint64_t kSentinelKey = 0x5E47'1E0E'0000'0002ULL;

constexpr std::uint64_t child_key(std::uint64_t parent_key, int digit) noexcept {
  return hash_combine(parent_key, static_cast<std::uint64_t>(digit));
}

// Address of a vertex of the b-regular tree augmented with a parent of the
// root. Child digits are 1-based (digit i addresses the i-th offspring), the
// root is the empty sequence and the parent-of-root sentinel is a flag.
class VertexPath {
 public:
  VertexPath() = default;
  explicit VertexPath(std::vector<int> digits);

  static VertexPath root() { return VertexPath(); }
  static VertexPath parent_sentinel();

  bool is_sentinel() const noexcept { return sentinel_; }
  bool is_root() const noexcept { return !sentinel_ && digits_.empty(); }

  // |v|; the sentinel sits at level -1.
  int level() const noexcept {
    return sentinel_ ? -1 : static_cast<int>(digits_.size());
  }
  const std::vector<int>& digits() const noexcept { return digits_; }

  VertexPath child(int digit) const;
  // Parent of the root is the sentinel; the sentinel has no parent.
  VertexPath parent() const;

  std::uint64_t key() const noexcept;

  // Ancestor in the non-strict sense (a vertex is its own ancestor). The
  // sentinel is an ancestor of every vertex.
  bool is_ancestor_of(const VertexPath& other) const noexcept;
  bool is_neighbour_of(const VertexPath& other) const noexcept;

  // "root", "parent", or dotted digits such as "1.3.2".
  std::string to_string() const;
  static VertexPath parse(const std::string& text);

  friend bool operator==(const VertexPath&, const VertexPath&) = default;
  friend auto operator<=>(const VertexPath&, const VertexPath&) = default;

 private:
  std::vector<int> digits_;
  bool sentinel_ = false;
};

}  // namespace rwre
