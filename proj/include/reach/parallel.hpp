#pragma once

#if defined(_OPENMP)
#include <omp.h>
#else
inline int omp_get_max_threads() { return 1; }
inline int omp_get_thread_num() { return 0; }
#endif

namespace reach {

/// Resolve a worker-pool size: an explicit request wins, then the
/// REACHTUBE_THREADS environment variable, then the OpenMP default.
/// Returns at least 1.
int resolve_thread_count(int requested = 0);

}  // namespace reach
