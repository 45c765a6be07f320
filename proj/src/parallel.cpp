#include "vf/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace vf {

int worker_threads() {
  if (const char* env = std::getenv("VF_THREADS")) {
    try {
      int n = std::stoi(env);
      if (n > 0) return n;
    } catch (...) {
    }
  }
  return omp_get_max_threads();
}

}  // namespace vf
