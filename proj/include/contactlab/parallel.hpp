#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace contactlab {

/// Runs body(begin, end, worker) over contiguous chunks of [0, total) on up
/// to hardware_concurrency threads. The first exception thrown by any worker
/// is rethrown on the caller.
template <class Body>
void parallel_chunks(std::size_t total, Body&& body) {
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(hw, std::max<std::size_t>(1, total / 1024));
  if (workers <= 1) {
    body(std::size_t{0}, total, std::size_t{0});
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  const std::size_t chunk = (total + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t b = w * chunk, e = std::min(total, b + chunk);
    threads.emplace_back([&, b, e, w] {
      try {
        body(b, e, w);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline std::size_t worker_count(std::size_t total) {
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  return std::min<std::size_t>(hw, std::max<std::size_t>(1, total / 1024));
}

}  // namespace contactlab
