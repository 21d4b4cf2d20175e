#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace toeplitz_hc {

/// Worker count: TOEPLITZ_HC_THREADS if set and positive, else the hardware
/// concurrency.
inline unsigned thread_count()
{
    if (const char *env = std::getenv("TOEPLITZ_HC_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) {
            return static_cast<unsigned>(v);
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(i) for i in [0, n) over contiguous chunks. Results must be
/// written to per-index slots so the outcome does not depend on scheduling.
/// The exception thrown at the lowest index is rethrown.
template <class Body>
void parallel_for(std::size_t n, Body &&body)
{
    const std::size_t workers = std::min<std::size_t>(thread_count(), std::max<std::size_t>(n / 64, 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            body(i);
        }
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            const std::size_t lo = w * chunk;
            const std::size_t hi = std::min(n, lo + chunk);
            for (std::size_t i = lo; i < hi; ++i) {
                try {
                    body(i);
                } catch (...) {
                    errors[w] = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto &t : pool) {
        t.join();
    }
    for (std::size_t w = 0; w < workers; ++w) {
        if (errors[w]) {
            std::rethrow_exception(errors[w]);
        }
    }
}

} // namespace toeplitz_hc
