#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace bmc {

// Index-parallel loop over [0, n). Work items must write to disjoint
// slots; results are then independent of the worker count and schedule.
inline void parallel_for(long long n, int workers,
                         const std::function<void(long long)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (long long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<long long> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto drain = [&] {
    for (long long i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      if (failed.load(std::memory_order_relaxed)) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!failed.exchange(true)) error = std::current_exception();
        return;
      }
    }
  };

  const int w = int(std::min<long long>(workers, n));
  std::vector<std::thread> pool;
  pool.reserve(std::size_t(w));
  for (int t = 0; t < w; ++t) pool.emplace_back(drain);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace bmc
