#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lergo {

/// Run fn(begin, end) on contiguous chunks of [0, n). Chunk c covers indices
/// below those of chunk c+1, so callers that keep per-chunk results and merge
/// them in chunk order get an evaluation-order independent reduction.
template <class Fn>
void parallel_chunks(std::size_t n, std::size_t chunks, Fn&& fn)
{
    chunks = std::max<std::size_t>(1, std::min(chunks, n));
    if (chunks == 1) {
        fn(std::size_t{0}, n, std::size_t{0});
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (std::size_t c = 0; c < chunks; ++c) {
        const std::size_t begin = n * c / chunks;
        const std::size_t end = n * (c + 1) / chunks;
        pool.emplace_back([&, begin, end, c] {
            try {
                fn(begin, end, c);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error)
                    error = std::current_exception();
            }
        });
    }
    for (auto& t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

inline std::size_t worker_count()
{
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// fn(i) for every i in [0, n); results must be written to per-index slots.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn)
{
    parallel_chunks(n, worker_count(), [&](std::size_t begin, std::size_t end, std::size_t) {
        for (std::size_t i = begin; i < end; ++i)
            fn(i);
    });
}

} // namespace lergo
