#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace wow {

// Runs fn(i) for i in [0, n). threads <= 1 runs inline. Workers own a static
// stride partition, so the set of indices each computes never depends on
// scheduling; callers writing to disjoint slots get identical results in
// single- and multi-threaded runs.
inline void parallel_for(long n, int threads, const std::function<void(long)>& fn) {
  if (n <= 0) return;
  long workers = std::min<long>(std::max(threads, 1), n);
  if (workers <= 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (long w = 0; w < workers; ++w) {
    pool.emplace_back([&fn, w, workers, n] {
      for (long i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace wow
