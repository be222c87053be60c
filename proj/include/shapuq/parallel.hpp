#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace shapuq {

inline int resolve_thread_count(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(i) for i in [0, count).  Items must be independent (each writes
/// only its own output slot); under that contract results are identical for
/// every thread count.
inline void parallel_for(std::size_t count, int threads,
                         const std::function<void(std::size_t)>& fn) {
  const int t = resolve_thread_count(threads);
  if (t <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int spawn = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(t), count));
  pool.reserve(static_cast<std::size_t>(spawn));
  for (int k = 0; k < spawn; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

/// Runs fn(begin, end) over a partition of [0, count).  Like parallel_for,
/// every item must write only its own slot; the partition then has no effect
/// on results.
inline void parallel_for_chunks(
    std::size_t count, int threads,
    const std::function<void(std::size_t, std::size_t)>& fn) {
  const int t = resolve_thread_count(threads);
  if (t <= 1 || count < 2048) {
    if (count > 0) fn(0, count);
    return;
  }
  const std::size_t chunks =
      std::min<std::size_t>(count, static_cast<std::size_t>(t) * 8);
  const std::size_t step = (count + chunks - 1) / chunks;
  parallel_for(chunks, t, [&](std::size_t c) {
    const std::size_t begin = c * step;
    const std::size_t end = std::min(count, begin + step);
    if (begin < end) fn(begin, end);
  });
}

}  // namespace shapuq
