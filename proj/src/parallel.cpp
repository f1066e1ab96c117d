#include "neuroperf/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace neuroperf {

int max_threads() { return omp_get_max_threads(); }

void set_max_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

void apply_thread_env() {
  const char* v = std::getenv("NEUROPERF_THREADS");
  if (!v) return;
  try {
    const int n = std::stoi(v);
    if (n > 0) set_max_threads(n);
  } catch (const std::exception&) {
    // Malformed values leave the OpenMP default in place.
  }
}

}  // namespace neuroperf
