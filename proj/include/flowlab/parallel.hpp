// SPDX-License-Identifier: Apache-2.0
#pragma once

#ifdef _OPENMP
#include <omp.h>
#endif

#include <cstdint>

namespace flowlab {

// All hot loops in this library are "one independent result slot per item":
// each item writes only its own outputs, and reductions afterwards run in
// index order.  That makes every kernel produce bit-identical results for any
// worker count; threads > 1 only changes wall time.
//
// `threads == 1` is the serial reference path (a plain loop, no OpenMP
// involvement); it is kept separate so tests can compare the parallel kernel
// against it and the bench target can time the two.
template <typename Fn>
void parallel_for(std::int64_t n, int threads, Fn&& fn) {
  if (threads <= 1 || n < 2) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(threads)
  for (std::int64_t i = 0; i < n; ++i) fn(i);
#else
  for (std::int64_t i = 0; i < n; ++i) fn(i);
#endif
}

inline int hardware_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace flowlab
