#include "ksv/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>

namespace ksv {

namespace {
std::atomic<int> g_worker_override{0};
}  // namespace

int worker_count() {
#ifdef _OPENMP
  int n = omp_get_max_threads();
#else
  int n = 1;
#endif
  int cap = g_worker_override.load();
  if (cap <= 0) {
    if (const char* env = std::getenv("KSV_THREADS")) cap = std::atoi(env);
  }
  if (cap > 0) n = std::min(n, cap);
  return std::max(n, 1);
}

void set_worker_count(int n) { g_worker_override.store(n); }

}  // namespace ksv
