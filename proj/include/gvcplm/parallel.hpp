#pragma once

#include <cstdint>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gvcplm {

inline int hardware_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// Runs body(i) for i in [0, n). threads <= 0 means use all hardware threads;
// threads == 1 takes the plain serial loop, which is the reference path the
// tests compare against. Work items must be independent and write only to
// their own slot, so results are identical at any thread count.
template <class F>
void parallel_for(std::int64_t n, int threads, F&& body) {
  if (n <= 0) return;
#ifdef _OPENMP
  if (threads <= 0) threads = omp_get_max_threads();
  if (threads > 1 && n > 1 && !omp_in_parallel()) {
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }
#else
  (void)threads;
#endif
  for (std::int64_t i = 0; i < n; ++i) body(i);
}

}  // namespace gvcplm
