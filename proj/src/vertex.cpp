// Copyright 2026 The rwre Authors
// SPDX-License-Identifier: Apache-2.0

#include "rwre/vertex.hpp"

#include <algorithm>
#include <sstream>

#include "rwre/error.hpp"

namespace rwre {

VertexPath::VertexPath(std::vector<int> digits) : digits_(std::move(digits)) {
  if (std::any_of(digits_.begin(), digits_.end(), [](int d) { return d < 1; })) {
    throw InvalidInput("vertex digits must be >= 1");
  }
}

VertexPath VertexPath::parent_sentinel() {
  VertexPath v;
  v.sentinel_ = true;
  return v;
}

VertexPath VertexPath::child(int digit) const {
  if (sentinel_) return root();
  if (digit < 1) throw InvalidInput("child digit must be >= 1");
  VertexPath c = *this;
  c.digits_.push_back(digit);
  return c;
}

VertexPath VertexPath::parent() const {
  if (sentinel_) throw InvalidInput("the parent-of-root sentinel has no parent");
  if (digits_.empty()) return parent_sentinel();
  VertexPath p = *this;
  p.digits_.pop_back();
  return p;
}

std::uint64_t VertexPath::key() const noexcept {
  if (sentinel_) return kSentinelKey;
  std::uint64_t k = kRootKey;
  for (int d : digits_) k = child_key(k, d);
  return k;
}

bool VertexPath::is_ancestor_of(const VertexPath& other) const noexcept {
  if (sentinel_) return true;
  if (other.sentinel_) return false;
  if (digits_.size() > other.digits_.size()) return false;
  return std::equal(digits_.begin(), digits_.end(), other.digits_.begin());
}

bool VertexPath::is_neighbour_of(const VertexPath& other) const noexcept {
  if (level() == other.level() + 1) return other.is_ancestor_of(*this);
  if (other.level() == level() + 1) return is_ancestor_of(other);
  return false;
}

std::string VertexPath::to_string() const {
  if (sentinel_) return "parent";
  if (digits_.empty()) return "root";
  std::ostringstream out;
  for (std::size_t i = 0; i < digits_.size(); ++i) {
    if (i) out << '.';
    out << digits_[i];
  }
  return out.str();
}

VertexPath VertexPath::parse(const std::string& text) {
  if (text == "parent") return parent_sentinel();
  if (text == "root" || text.empty()) return root();
  std::vector<int> digits;
  std::istringstream in(text);
  std::string part;
  while (std::getline(in, part, '.')) {
    try {
      std::size_t used = 0;
      digits.push_back(std::stoi(part, &used));
      if (used != part.size()) throw InvalidInput("bad vertex address: " + text);
    } catch (const std::logic_error&) {
      throw InvalidInput("bad vertex address: " + text);
    }
  }
  return VertexPath(std::move(digits));
}

}  // namespace rwre
