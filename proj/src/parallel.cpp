#include "fissura/parallel.hpp"

#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fissura {

int thread_count() {
#ifdef _OPENMP
  static const int cached = [] {
    if (const char* env = std::getenv("FISSURA_THREADS")) {
      try {
        const int n = std::stoi(env);
        if (n > 0) return n;
      } catch (const std::exception&) {
      }
    }
    return omp_get_max_threads();
  }();
  return cached;
#else
  return 1;
#endif
}

void parallel_for(int n, const std::function<void(int)>& f) {
#ifdef _OPENMP
  const int nt = thread_count();
  if (nt > 1) {
#pragma omp parallel for num_threads(nt) schedule(static)
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
#endif
  for (int i = 0; i < n; ++i) f(i);
}

void for_each_element(const Grid& grid, const std::function<void(int)>& f) {
  parallel_for(grid.element_count(), f);
}

void for_each_element_colored(const Grid& grid, const std::function<void(int)>& f) {
  const int nx = grid.nx();
  const int ny = grid.ny();
  for (int color = 0; color < 4; ++color) {
    const int ci = color & 1;
    const int cj = color >> 1;
    const int rows = (ny - cj + 1) / 2;
#ifdef _OPENMP
    const int nt = thread_count();
#pragma omp parallel for num_threads(nt) schedule(static) if (nt > 1)
#endif
    for (int r = 0; r < rows; ++r) {
      const int j = cj + 2 * r;
      for (int i = ci; i < nx; i += 2) f(j * nx + i);
    }
  }
}

double pairwise_sum(const double* data, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += data[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

}  // namespace fissura
