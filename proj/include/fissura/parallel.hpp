#pragma once

#include <functional>

#include "fissura/grid.hpp"

namespace fissura {

// Worker count: FISSURA_THREADS if set to a positive integer, otherwise the
// OpenMP default. Always 1 without OpenMP.
int thread_count();

// Calls f(e) for every element, possibly concurrently. f must only write to
// per-element storage.
void for_each_element(const Grid& grid, const std::function<void(int)>& f);

// Calls f(e) for every element in four colour sweeps; elements within a sweep
// share no node, so f may scatter into nodal arrays without races, and the
// per-node accumulation order is the same for any thread count.
void for_each_element_colored(const Grid& grid, const std::function<void(int)>& f);

// Calls f(i) for i in [0, n), possibly concurrently.
void parallel_for(int n, const std::function<void(int)>& f);

// Pairwise (tree) summation; the result depends only on the input order.
double pairwise_sum(const double* data, std::size_t n);

}  // namespace fissura
