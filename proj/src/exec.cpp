#include "mdf/exec.hpp"

#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mdf {

int max_threads() {
  int n = 1;
#ifdef _OPENMP
  n = omp_get_max_threads();
#endif
  if (const char* cap = std::getenv("MDF_THREADS")) {
    try {
      int c = std::stoi(cap);
      if (c >= 1 && c < n) n = c;
    } catch (...) {
      // ignore malformed values, keep the OpenMP default
    }
  }
  return n;
}

}  // namespace mdf
