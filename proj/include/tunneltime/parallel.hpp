#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace tunneltime {

/// Worker count from TUNNELTIME_WORKERS (default: hardware concurrency, at least 1).
std::size_t worker_count();

/// Runs task(i) for i in [0, n) on up to `workers` threads. Tasks must write
/// disjoint outputs; results then do not depend on the worker count.
/// The first exception thrown by any task is rethrown after all threads join.
template <class Task>
void parallel_for(std::size_t n, std::size_t workers, Task&& task) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
      }
    }
  };
  std::vector<std::jthread> pool;
  const std::size_t count = workers < n ? workers : n;
  pool.reserve(count);
  for (std::size_t w = 0; w < count; ++w) pool.emplace_back(run);
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace tunneltime
