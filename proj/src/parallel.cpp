#include "lqts/parallel.hpp"

#include <omp.h>

#include <exception>
#include <stdexcept>

namespace lqts {

void for_each_serial(std::int64_t n, const std::function<void(std::int64_t)>& body) {
  for (std::int64_t i = 0; i < n; ++i) body(i);
}

void for_each_parallel(std::int64_t n, int threads,
                       const std::function<void(std::int64_t)>& body) {
  if (threads < 1) throw std::invalid_argument("thread count must be positive");
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n > 0 ? n : 0));

#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }

  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void for_each_replication(std::int64_t n, int threads,
                          const std::function<void(std::int64_t)>& body) {
  if (threads <= 1) {
    for_each_serial(n, body);
  } else {
    for_each_parallel(n, threads, body);
  }
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace lqts
