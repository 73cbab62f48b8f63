#pragma once

#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace endodiff {

/// Number of worker threads, from ENDODIFF_WORKERS when set (clamped to
/// [1, 256]), otherwise std::thread::hardware_concurrency(). Worker count
/// never affects results, only scheduling.
unsigned worker_count();

/// Runs fn(i) for i in [0, count) on up to worker_count() threads.
///
/// Callers keep determinism by writing results into pre-sized storage at
/// index i and reducing serially afterwards. The first exception thrown by
/// any worker (lowest worker index wins) is rethrown on the calling thread.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
    const std::size_t workers = std::min<std::size_t>(worker_count(), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < count; i += workers) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace endodiff
