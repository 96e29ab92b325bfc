// SPDX-License-Identifier: Apache-2.0
#include "lutnn/threading.hpp"

#include <algorithm>
#include <thread>
#include <vector>

namespace lutnn {

namespace {
int g_threads = []() {
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : int(hw);
}();
}

void set_thread_count(int n) { g_threads = std::max(1, n); }
int thread_count() { return g_threads; }

void parallel_for(size_t n, const std::function<void(size_t, size_t)>& chunk) {
  if (n == 0) return;
  size_t workers = std::min<size_t>(g_threads, n);
  if (workers <= 1) {
    chunk(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  size_t per = (n + workers - 1) / workers;
  for (size_t w = 0; w < workers; ++w) {
    size_t lo = w * per;
    size_t hi = std::min(n, lo + per);
    if (lo >= hi) break;
    pool.emplace_back([&chunk, lo, hi] { chunk(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace lutnn
