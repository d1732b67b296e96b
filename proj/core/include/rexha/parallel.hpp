#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace rexha {

/// Runs fn(0..n-1) on up to max_workers threads. Each index runs exactly
/// once; if any call throws, the exception of the lowest failing index is
/// rethrown after all workers stop.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t max_workers, Fn&& fn) {
  if (n == 0) return;
  const std::size_t workers = std::clamp<std::size_t>(max_workers, 1, n);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::vector<std::exception_ptr> errors(n);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n && !stop; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
            stop = true;
          }
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace rexha
