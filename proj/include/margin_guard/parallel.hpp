#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace margin_guard {

// Thread cap: MARGIN_GUARD_THREADS wins over hardware concurrency.
inline int max_threads() {
  if (const char* env = std::getenv("MARGIN_GUARD_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(begin, end, chunk_index) on disjoint index ranges. Results must be
// combined by chunk index afterwards so the output stays deterministic.
template <class Fn>
void parallel_chunks(long n, Fn&& fn) {
  const int threads = std::min<long>(max_threads(), std::max<long>(n, 1));
  if (threads <= 1 || n < 256) {
    fn(0L, n, 0);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const long chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const long begin = t * chunk;
    const long end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end, t] { fn(begin, end, t); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace margin_guard
