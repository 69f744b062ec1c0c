#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace rayloc::detail {

// Splits [0, n) into contiguous chunks and runs fn(begin, end) on worker
// threads. threads == 0 picks the hardware count. Callers must write
// results into pre-allocated per-index slots so the outcome does not
// depend on scheduling. The first exception thrown by any chunk is
// rethrown on the calling thread.
inline void parallel_for(std::size_t n, int threads,
                         const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    std::size_t want = threads > 0 ? static_cast<std::size_t>(threads)
                                   : std::max(1u, std::thread::hardware_concurrency());
    want = std::min(want, n);
    if (want <= 1) {
        fn(0, n);
        return;
    }

    std::vector<std::exception_ptr> errors(want);
    std::vector<std::thread> pool;
    pool.reserve(want);
    const std::size_t chunk = (n + want - 1) / want;
    for (std::size_t t = 0; t < want; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, t, begin, end] {
            try {
                fn(begin, end);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& err : errors)
        if (err) std::rethrow_exception(err);
}

}  // namespace rayloc::detail
