#pragma once

/*
 * Minimal fan-out helper for embarrassingly parallel loops. Work items are
 * identified by index; callers write results into per-index slots (or merge
 * per-block partials in index order), which keeps outputs independent of the
 * worker count. CACHEBEAM_THREADS caps the number of workers.
 */

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <thread>
#include <vector>

namespace cachebeam {

inline int max_worker_threads() {
  if (const char* env = std::getenv("CACHEBEAM_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<int>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// Runs fn(i) for i in [0, count). fn must only touch state owned by index i.
template <typename F>
void parallel_for_index(std::int64_t count, F&& fn, int threads = 0) {
  if (count <= 0) return;
  if (threads <= 0) threads = max_worker_threads();
  if (threads > count) threads = static_cast<int>(count);
  if (threads <= 1) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::int64_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace cachebeam
