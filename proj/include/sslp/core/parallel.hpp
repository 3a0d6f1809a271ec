#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sslp::par {

// Parallel loop over [0, n). Every iteration must write a disjoint slice
// of the output and reduce in a fixed serial order internally, so results
// are bitwise identical for any thread count.
template <class F>
inline void parallel_for(std::int64_t n, F&& f) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) f(i);
#else
  for (std::int64_t i = 0; i < n; ++i) f(i);
#endif
}

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_threads(int n) {
#ifdef _OPENMP
  omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace sslp::par
