// Deterministic fork/join helper for embarrassingly parallel trial loops.
//
// Work item i must depend only on i (plus read-only shared state) and write
// only to slot i of its output, so results are identical for any thread
// count. Reductions happen serially, in index order, after the join.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qdl {

inline int& thread_count_ref() {
  static int count = 0;  // 0 = use hardware concurrency
  return count;
}

inline void set_thread_count(int n) { thread_count_ref() = n > 0 ? n : 0; }

inline int thread_count() {
  int n = thread_count_ref();
  if (n > 0) return n;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const int threads = thread_count();
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    constexpr std::size_t kChunk = 64;
    for (;;) {
      std::size_t begin = next.fetch_add(kChunk);
      if (begin >= n) return;
      std::size_t end = std::min(begin + kChunk, n);
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  int spawn = std::min<std::size_t>(threads, (n + 63) / 64);
  pool.reserve(spawn);
  for (int t = 0; t < spawn; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace qdl
