#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace voxelopt {

/// Worker cap for per-voxel loops. Reads VOXELOPT_THREADS once; 0, unset or
/// unparsable means hardware concurrency.
inline int thread_count() {
    static const int cached = [] {
        int n = int(std::thread::hardware_concurrency());
        if (n < 1) n = 1;
        if (const char* env = std::getenv("VOXELOPT_THREADS")) {
            char* end = nullptr;
            long v = std::strtol(env, &end, 10);
            if (end != env && *end == '\0' && v > 0) n = int(std::min(v, 1024L));
        }
        return n;
    }();
    return cached;
}

/// Runs fn(lo, hi) over a partition of [0, n) with contiguous chunks, one per
/// worker. Workers write disjoint output ranges and never reduce, so results
/// are bit-identical for any thread count.
template <class Fn>
void parallel_for(std::int64_t n, Fn&& fn) {
    if (n <= 0) return;
    const int workers = std::min<std::int64_t>(thread_count(), n);
    if (workers <= 1 || n < 4096) {
        fn(std::int64_t(0), n);
        return;
    }
    const std::int64_t chunk = (n + workers - 1) / workers;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(std::size_t(workers));
    for (int w = 0; w < workers; ++w) {
        const std::int64_t lo = std::int64_t(w) * chunk;
        const std::int64_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            try {
                fn(lo, hi);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace voxelopt
