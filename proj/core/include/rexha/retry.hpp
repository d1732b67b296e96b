#pragma once

#include <algorithm>
#include <chrono>
#include <functional>
#include <thread>
#include <utility>

#include "rexha/error.hpp"

namespace rexha {

/// Exponential backoff for calls to remote model endpoints.
///
/// Attempt n (0-based retry index) waits initial_delay * multiplier^n,
/// capped at max_delay. Only errors with Error::retryable() are retried.
struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds initial_delay{200};
  double multiplier = 2.0;
  std::chrono::milliseconds max_delay{5000};

  std::chrono::milliseconds delay_for(int retry_index) const {
    double ms = static_cast<double>(initial_delay.count());
    for (int i = 0; i < retry_index; ++i) ms *= multiplier;
    ms = std::min(ms, static_cast<double>(max_delay.count()));
    return std::chrono::milliseconds{static_cast<long long>(ms)};
  }

  static RetryPolicy immediate(int retries = 3) {
    return RetryPolicy{retries, std::chrono::milliseconds{0}, 1.0,
                       std::chrono::milliseconds{0}};
  }
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

inline void default_sleep(std::chrono::milliseconds d) {
  if (d.count() > 0) std::this_thread::sleep_for(d);
}

template <typename Fn>
auto with_retry(const RetryPolicy& policy, Fn&& fn,
                const Sleeper& sleep = default_sleep) -> decltype(fn()) {
  for (int attempt = 0;; ++attempt) {
    try {
      return fn();
    } catch (const Error& e) {
      if (!e.retryable() || attempt >= policy.max_retries) throw;
      sleep(policy.delay_for(attempt));
    }
  }
}

}  // namespace rexha
