#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace srms {

/// Worker count: SRMS_THREADS if set, else hardware concurrency.
inline unsigned worker_count() {
  if (const char* env = std::getenv("SRMS_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls fn(i) for i in [0, count). Chunks are handed out dynamically, so
/// fn must write only to slot i of caller-owned storage; results are then
/// independent of scheduling.
template <class Fn>
void parallel_for(std::int64_t count, Fn&& fn, std::int64_t chunk = 64) {
  if (count <= 0) return;
  const unsigned workers =
      static_cast<unsigned>(std::min<std::int64_t>(worker_count(), (count + chunk - 1) / chunk));
  if (workers <= 1) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto body = [&] {
    try {
      for (;;) {
        const std::int64_t begin = next.fetch_add(chunk);
        if (begin >= count) return;
        const std::int64_t end = std::min(count, begin + chunk);
        for (std::int64_t i = begin; i < end; ++i) fn(i);
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next.store(count);
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(body);
  body();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

/// Like parallel_for, but each worker owns one State built by make_state();
/// fn(state, i) may update it freely. Which indices a worker sees depends on
/// scheduling, so callers must merge the returned states with an operation that
/// is exact and order-free (integer counts, max, min).
template <class MakeState, class Fn>
auto parallel_accumulate(std::int64_t count, MakeState&& make_state, Fn&& fn, std::int64_t chunk = 64) {
  using State = decltype(make_state());
  const unsigned workers = static_cast<unsigned>(
      std::max<std::int64_t>(1, std::min<std::int64_t>(worker_count(), (count + chunk - 1) / chunk)));
  std::vector<State> states;
  states.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) states.push_back(make_state());
  std::atomic<unsigned> next_slot{0};
  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto body = [&] {
    State& state = states[next_slot.fetch_add(1)];
    try {
      for (;;) {
        const std::int64_t begin = next.fetch_add(chunk);
        if (begin >= count) return;
        const std::int64_t end = std::min(count, begin + chunk);
        for (std::int64_t i = begin; i < end; ++i) fn(state, i);
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next.store(count);
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(body);
    body();
  }
  if (failure) std::rethrow_exception(failure);
  return states;
}

}  // namespace srms
