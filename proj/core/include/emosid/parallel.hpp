#pragma once

#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace emosid {

/// Runs fn(i) for i in [0, n) across up to n_threads threads with a static
/// block partition. Items must be independent; outputs written per index are
/// identical no matter the thread count. The first exception thrown by any
/// item is rethrown on the caller's thread.
template <typename Fn>
void parallel_for(std::size_t n, int n_threads, Fn &&fn) {
  if (n == 0) return;
  const std::size_t workers =
      n_threads <= 1 ? 1 : std::min<std::size_t>(static_cast<std::size_t>(n_threads), n);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }

  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      const std::size_t begin = n * w / workers;
      const std::size_t end = n * (w + 1) / workers;
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto &t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace emosid
