#ifndef GPACFORGE_BATCH_HPP
#define GPACFORGE_BATCH_HPP

#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gpacforge::batch {

/// Independent work items (one integration run, one conformance point) fan
/// out across OpenMP threads; every item writes only its own slot, so the
/// parallel path is bit-identical to the serial reference used by the tests.
template <class Fn>
void run_indexed(std::size_t count, bool parallel, Fn&& fn) {
    if (!parallel) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
    for (long long i = 0; i < static_cast<long long>(count); ++i)
        fn(static_cast<std::size_t>(i));
#else
    for (std::size_t i = 0; i < count; ++i) fn(i);
#endif
}

/// Maps `fn` over inputs into a result vector, serial or OpenMP-parallel.
template <class T, class Fn>
auto map(const std::vector<T>& inputs, bool parallel, Fn&& fn)
    -> std::vector<decltype(fn(inputs.front()))> {
    using R = decltype(fn(inputs.front()));
    std::vector<R> out(inputs.size());
    run_indexed(inputs.size(), parallel, [&](std::size_t i) { out[i] = fn(inputs[i]); });
    return out;
}

inline int thread_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace gpacforge::batch

#endif
