#include "pathwise/parallel.hpp"

#include <cstdlib>
#include <string>

namespace pathwise {

int effective_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("TP_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (...) {
      // fall through to the OpenMP default
    }
  }
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

bool openmp_enabled() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

}  // namespace pathwise
