#pragma once

#include <cstddef>
#include <exception>

namespace spit::detail {

/// Runs body(i) for i in [0, n) across OpenMP threads. An exception thrown by any iteration is
/// rethrown on the calling thread once the loop finishes; with several, the lowest index wins
/// so the reported error does not depend on scheduling.
template <class Body>
void parallel_for(std::ptrdiff_t n, Body &&body) {
    std::exception_ptr error;
    std::ptrdiff_t error_index = n;
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            body(i);
        } catch (...) {
#pragma omp critical(spit_parallel_error)
            if (i < error_index) {
                error_index = i;
                error = std::current_exception();
            }
        }
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace spit::detail
