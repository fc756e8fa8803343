#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gpata {

// Every data-parallel kernel takes a policy. kSerial is the reference path
// the tests compare the OpenMP path against; both must produce identical
// output because each index writes only its own slot.
enum class ExecutionPolicy { kSerial, kParallel };

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// Runs body(i) for i in [0, n). Exceptions thrown by body are rethrown on the
// calling thread (first one wins).
template <class Body>
void for_each_index(std::size_t n, ExecutionPolicy policy, Body&& body) {
  if (policy == ExecutionPolicy::kSerial || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(guided)
  for (long long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace gpata
