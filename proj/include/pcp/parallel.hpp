#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include <omp.h>

namespace pcp {

inline int resolve_threads(int requested) {
  return requested > 0 ? requested : omp_get_max_threads();
}

/// Sum of term(i) over [0, n) with a fixed block decomposition, so the result
/// is bitwise identical for any thread count.
template <class Term>
double deterministic_sum(std::size_t n, int threads, Term&& term) {
  constexpr std::size_t kBlock = 4096;
  const std::size_t num_blocks = (n + kBlock - 1) / kBlock;
  if (num_blocks <= 1) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += term(i);
    return s;
  }
  std::vector<double> partial(num_blocks, 0.0);
  const long long nb = static_cast<long long>(num_blocks);
#pragma omp parallel for schedule(static) num_threads(std::max(1, threads)) if (threads > 1)
  for (long long b = 0; b < nb; ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
    const std::size_t hi = std::min(n, lo + kBlock);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += term(i);
    partial[static_cast<std::size_t>(b)] = s;
  }
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

/// Parallel loop over [0, n); falls back to a plain loop for small ranges.
template <class Body>
void parallel_for(std::size_t n, int threads, Body&& body, std::size_t grain = 2048) {
  const long long count = static_cast<long long>(n);
  const bool go_parallel = threads > 1 && n >= grain;
#pragma omp parallel for schedule(static) num_threads(std::max(1, threads)) if (go_parallel)
  for (long long i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
}

}  // namespace pcp
