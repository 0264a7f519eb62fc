#pragma once

// Thread-count resolution and the per-path parallel loop. Work is partitioned
// by path index and every worker writes only to its own preallocated slot, so
// results are bit-identical for any thread count; reductions happen afterwards
// in index order.

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pathwise {

// requested > 0 wins; otherwise the TP_THREADS environment variable; otherwise
// the OpenMP default (1 in serial builds).
int effective_threads(int requested);

bool openmp_enabled();

template <class F>
void parallel_for_paths(std::size_t count, int threads, F&& body) {
#ifdef _OPENMP
  if (threads > 1) {
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (long long i = 0; i < (long long)count; ++i) body((std::size_t)i);
    return;
  }
#else
  (void)threads;
#endif
  for (std::size_t i = 0; i < count; ++i) body(i);
}

}  // namespace pathwise
