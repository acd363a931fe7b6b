// Copyright 2026 The rwre Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rwre {

// Thread count used when a caller passes 0.
inline int default_threads() {
  return static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
}

// Calls f(i) for i in [0, n) on `threads` workers pulling indices from a
// shared counter. Results must be written by index, so output does not
// depend on scheduling. The first exception thrown is rethrown.
template <class F>
void parallel_for(long n, int threads, F&& f) {
  if (threads <= 0) threads = default_threads();
  threads = static_cast<int>(std::min<long>(threads, std::max(1L, n)));
  if (threads == 1) {
    for (long i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const long i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n) return;
      try {
        f(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace rwre
