#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace lppl::detail {

/// Runs fn(i) for i in [0, n) across worker threads. fn must not throw;
/// callers store per-index results so the outcome is identical to a serial
/// loop regardless of scheduling.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned n_threads = 0) {
    if (n == 0)
        return;
    if (n_threads == 0)
        n_threads = std::thread::hardware_concurrency();
    if (n_threads <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    if (n_threads > n)
        n_threads = static_cast<unsigned>(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n)
                return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(n_threads - 1);
    for (unsigned t = 1; t < n_threads; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& th : pool)
        th.join();
}

}  // namespace lppl::detail
