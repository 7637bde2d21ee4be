#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>

namespace kvh {

// Global worker count. 0 = hardware concurrency. Changing the count must not
// change any numerical result: work is split into chunks whose boundaries
// depend only on the problem size, and reductions run over a fixed tree.
void set_thread_count(int count);
int thread_count();

// Runs fn(begin, end) over disjoint chunks covering [0, n). Chunk boundaries
// are a function of n alone. fn must only write to locations indexed by its
// own range.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

// Same with an explicit chunk size (for coarse work items).
void parallel_for_grain(std::size_t n, std::size_t grain,
                        const std::function<void(std::size_t, std::size_t)>& fn);

// Deterministic pairwise summation (fixed recursion shape).
double pairwise_sum(std::span<const double> xs);
std::complex<double> pairwise_sum(std::span<const std::complex<double>> xs);

}  // namespace kvh
