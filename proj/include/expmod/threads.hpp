#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace expmod {

// Worker cap from the EXPMOD_THREADS environment variable. Unset, empty or
// unparsable values fall back to the hardware concurrency; a value of 1
// forces fully serial execution.
inline unsigned thread_cap() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const char* env = std::getenv("EXPMOD_THREADS");
    if (env == nullptr || *env == '\0') return hw;
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end == env || v < 1) return hw;
    return static_cast<unsigned>(std::min<long>(v, 1024));
}

// Runs fn(i) for i in [0, n) on up to thread_cap() workers using static
// contiguous block partitioning. Results must be written to caller-owned
// slots indexed by i, which keeps every run bitwise identical regardless of
// the worker count. The first exception thrown by fn is rethrown on the
// calling thread after all workers have joined; the abort flag only short
// circuits work that would be discarded anyway.
template <class F>
void parallel_for(std::size_t n, F&& fn, unsigned max_workers = 0) {
    if (n == 0) return;
    unsigned cap = thread_cap();
    if (max_workers > 0) cap = std::min(cap, max_workers);
    unsigned workers = static_cast<unsigned>(std::min<std::size_t>(cap, n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr error;
    std::mutex error_mutex;
    std::atomic<bool> abort{false};
    std::size_t base = n / workers, rem = n % workers, lo = 0;
    for (unsigned w = 0; w < workers; ++w) {
        std::size_t hi = lo + base + (w < rem ? 1 : 0);
        pool.emplace_back([lo, hi, &fn, &error, &error_mutex, &abort] {
            for (std::size_t i = lo; i < hi; ++i) {
                if (abort.load(std::memory_order_relaxed)) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    abort.store(true, std::memory_order_relaxed);
                    return;
                }
            }
        });
        lo = hi;
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace expmod
