#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace halfmoll {

// Worker count: HALFMOLL_THREADS if set and positive, else hardware concurrency.
std::size_t worker_count();

// Calls body(i) for i in [0, n). Each index is visited exactly once; the
// partition into contiguous chunks depends only on n and the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

// Pairwise summation; the result does not depend on the worker count.
double pairwise_sum(std::span<const double> values);

}  // namespace halfmoll
