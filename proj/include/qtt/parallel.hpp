#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace qtt::detail {

// Worker cap: QTT_THREADS if set and positive, else hardware concurrency.
inline int thread_count() {
  static const int n = [] {
    if (const char* env = std::getenv("QTT_THREADS")) {
      const int v = std::atoi(env);
      if (v > 0) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
  }();
  return n;
}

// Runs body(i) for i in [0, n). Work is index-addressed, so results are
// identical regardless of scheduling; exceptions are rethrown on the caller.
template <typename F>
void parallel_for(std::int64_t n, F&& body) {
  if (n <= 0) return;
  const int nt =
      static_cast<int>(std::min<std::int64_t>(thread_count(), n));
  if (nt <= 1 || n < 4) {
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::int64_t> cursor{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::int64_t i = cursor.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(nt - 1);
  for (int t = 0; t < nt - 1; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace qtt::detail
