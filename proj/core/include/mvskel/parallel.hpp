#pragma once

#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace mvskel {

/// Runs fn(begin, end) over contiguous chunks of [begin, end) on up to
/// `threads` std::threads. Chunk boundaries depend only on the range and the
/// thread count, and chunks never share indices, so any computation that is
/// pure per index produces identical results for every thread count.
inline void parallel_for(std::int64_t begin, std::int64_t end, int threads,
                         const std::function<void(std::int64_t, std::int64_t)>& fn) {
  const std::int64_t count = end - begin;
  if (count <= 0) return;
  if (threads <= 1 || count == 1) {
    fn(begin, end);
    return;
  }
  const int workers = static_cast<int>(
      std::min<std::int64_t>(threads, count));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::int64_t chunk = (count + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const std::int64_t lo = begin + w * chunk;
    const std::int64_t hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

inline int default_worker_count() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace mvskel
