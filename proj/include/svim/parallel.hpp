#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace svim {

/// Runs fn(i) for i in [0, count) on at most `jobs` threads. Results and exceptions
/// are stored by index, so the outcome does not depend on scheduling.
template <typename Result>
struct IndexedOutcome {
  Result value{};
  std::exception_ptr error;
};

template <typename Result, typename Fn>
std::vector<IndexedOutcome<Result>> parallel_map(std::size_t count, int jobs, Fn&& fn) {
  std::vector<IndexedOutcome<Result>> out(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        out[i].value = fn(i);
      } catch (...) {
        out[i].error = std::current_exception();
      }
    }
  };
  const std::size_t threads =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, jobs)));
  if (threads <= 1) {
    worker();
    return out;
  }
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return out;
}

}  // namespace svim
