#pragma once

// Replica-parallel map with index-ordered results.

#include <cstddef>
#include <exception>
#include <type_traits>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dpre {

inline void set_thread_count(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

inline int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

/// out[k] = task(k) for k in [0, n). Tasks run on the OpenMP pool; the first
/// exception thrown by any task is rethrown after the loop.
template <class Task>
auto map_replicas(std::size_t n, Task&& task) -> std::vector<std::invoke_result_t<Task&, std::size_t>> {
  using Result = std::invoke_result_t<Task&, std::size_t>;
  std::vector<Result> out(n);
  std::exception_ptr error;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic)
  for (long long k = 0; k < count; ++k) {
    try {
      out[static_cast<std::size_t>(k)] = task(static_cast<std::size_t>(k));
    } catch (...) {
#pragma omp critical(dpre_map_replicas_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace dpre
