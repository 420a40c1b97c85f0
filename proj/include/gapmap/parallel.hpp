#pragma once

#include <cstdlib>
#include <thread>
#include <vector>

namespace gapmap {

/// Worker count: GAPMAP_THREADS caps it, hardware concurrency is the
/// default.  Always at least 1.
inline unsigned thread_count() {
  unsigned n = std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  if (const char* env = std::getenv("GAPMAP_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1 && unsigned(cap) < n) n = unsigned(cap);
  }
  return n;
}

/// Runs fn(i) for i in [begin, end) split into contiguous chunks.  Chunks
/// write disjoint indices, so results do not depend on the thread count;
/// reductions stay serial elsewhere for the same reason.
template <class Fn>
void parallel_for(std::size_t begin, std::size_t end, Fn&& fn) {
  const std::size_t total = end > begin ? end - begin : 0;
  const unsigned workers = thread_count();
  if (workers <= 1 || total < 4096) {
    for (std::size_t i = begin; i < end; ++i) fn(i);
    return;
  }
  const std::size_t chunk = (total + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t lo = begin + w * chunk;
    if (lo >= end) break;
    const std::size_t hi = std::min(end, lo + chunk);
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace gapmap
