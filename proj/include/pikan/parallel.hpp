#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pikan {

/// Fixed chunk width for parallel reductions. Partial results are produced
/// per chunk and combined in chunk order, so sums do not depend on the
/// number of threads.
inline constexpr std::size_t kReduceChunk = 64;

inline std::size_t chunk_count(std::size_t n) {
    return (n + kReduceChunk - 1) / kReduceChunk;
}

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline int thread_index() {
#ifdef _OPENMP
    return omp_get_thread_num();
#else
    return 0;
#endif
}

/// body(i) for i in [0, n); elements must be independent.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long i = 0; i < static_cast<long>(n); ++i) {
        body(static_cast<std::size_t>(i));
    }
}

/// body(begin, end, chunk_index) over fixed-width chunks of [0, n).
template <typename Body>
void parallel_chunks(std::size_t n, Body&& body) {
    const long nchunks = static_cast<long>(chunk_count(n));
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (long c = 0; c < nchunks; ++c) {
        const std::size_t begin = static_cast<std::size_t>(c) * kReduceChunk;
        const std::size_t end = begin + kReduceChunk < n ? begin + kReduceChunk : n;
        body(begin, end, static_cast<std::size_t>(c));
    }
}

}  // namespace pikan
