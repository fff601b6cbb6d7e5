#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace lqts {

/// Runs body(i) for i in [0, n) in index order on the calling thread.
/// This is the reference the parallel version is tested against.
void for_each_serial(std::int64_t n, const std::function<void(std::int64_t)>& body);

/// Runs body(i) for i in [0, n) on up to `threads` OpenMP threads. body must
/// only write state owned by index i. If any call throws, the exception from
/// the lowest failing index is rethrown after all workers have joined.
void for_each_parallel(std::int64_t n, int threads,
                       const std::function<void(std::int64_t)>& body);

/// Serial when threads <= 1, OpenMP otherwise.
void for_each_replication(std::int64_t n, int threads,
                          const std::function<void(std::int64_t)>& body);

/// Collects fn(i) into a vector ordered by i, whatever the completion order.
template <class T, class F>
std::vector<T> map_replications(std::int64_t n, int threads, F&& fn) {
  std::vector<T> out(static_cast<std::size_t>(n));
  for_each_replication(n, threads,
                       [&](std::int64_t i) { out[static_cast<std::size_t>(i)] = fn(i); });
  return out;
}

/// Hardware threads visible to OpenMP.
int max_threads();

}  // namespace lqts
