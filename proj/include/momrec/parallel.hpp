#pragma once

#include <exception>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace momrec {

inline int hardware_threads() {
#if defined(_OPENMP)
    return omp_get_max_threads();
#else
    return 1;
#endif
}

/// Runs f(i) for i in [0, n). Iterations must be independent; each writes
/// only its own output slot, so parallel and serial execution produce
/// bit-identical results. The first exception thrown by any iteration is
/// rethrown on the calling thread once the loop finishes.
template <class F>
void parallel_for(int n, F&& f) {
#if defined(_OPENMP)
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) {
        try {
            f(i);
        } catch (...) {
#pragma omp critical(momrec_parallel_for_error)
            if (!error)
                error = std::current_exception();
        }
    }
    if (error)
        std::rethrow_exception(error);
#else
    for (int i = 0; i < n; ++i)
        f(i);
#endif
}

template <class F>
void serial_for(int n, F&& f) {
    for (int i = 0; i < n; ++i)
        f(i);
}

} // namespace momrec
