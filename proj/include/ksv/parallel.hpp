#pragma once

// OpenMP helpers. Every parallel kernel in the library sizes its team with
// worker_count(), which honours the KSV_THREADS cap.

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ksv {

/// omp_get_max_threads(), capped by a positive integer in KSV_THREADS.
int worker_count();

/// Overrides KSV_THREADS for the rest of the process (0 clears the override).
void set_worker_count(int n);

}  // namespace ksv
