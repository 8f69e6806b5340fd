#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace pdm {

/// Worker count to use when the caller asks for "default" (0).
inline std::size_t default_threads() {
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Runs f(i) for i in [0, count) on up to `threads` workers. Items are
/// independent; callers write into pre-sized slots so results never depend
/// on scheduling. If several items throw, the exception of the lowest index
/// is rethrown.
template <class F>
void parallel_for(std::ptrdiff_t count, std::size_t threads, F&& f) {
  if (count <= 0) return;
  if (threads == 0) threads = default_threads();
  threads = std::min<std::size_t>(threads, static_cast<std::size_t>(count));
  if (threads <= 1) {
    for (std::ptrdiff_t i = 0; i < count; ++i) f(i);
    return;
  }

  std::atomic<std::ptrdiff_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr err;
  std::ptrdiff_t err_index = count;

  auto worker = [&] {
    for (;;) {
      const std::ptrdiff_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        f(i);
      } catch (...) {
        std::lock_guard lock(err_mutex);
        if (i < err_index) {
          err_index = i;
          err = std::current_exception();
        }
      }
    }
  };

  std::vector<std::jthread> pool;
  pool.reserve(threads - 1);
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();
  if (err) std::rethrow_exception(err);
}

}  // namespace pdm
