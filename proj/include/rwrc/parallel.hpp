#pragma once

#include <cstdint>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace rwrc::parallel {

// Static-striped worker pool: fn(i) runs once per index, writing only to its
// own per-index slot, and the caller reduces sequentially afterwards - so
// results are independent of the thread count and completion order.
inline void for_each_index(std::int64_t n, int threads,
                           const std::function<void(std::int64_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const int t_count = static_cast<int>(std::min<std::int64_t>(threads, n));
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(t_count);
  for (int t = 0; t < t_count; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::int64_t i = t; i < n; i += t_count) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace rwrc::parallel
