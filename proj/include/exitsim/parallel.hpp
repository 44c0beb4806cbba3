#pragma once

#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace exitsim {

inline int resolve_workers(int workers) {
    if (workers > 0) return workers;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

// Static contiguous split of [0, n). fn(i) must only touch state owned by
// index i; reductions happen afterwards in index order, so results do not
// depend on the worker count.
inline void parallel_for(long n, int workers, const std::function<void(long)>& fn) {
    workers = resolve_workers(workers);
    if (workers <= 1 || n < 2) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    const int k = static_cast<int>(std::min<long>(workers, n));
    std::vector<std::thread> threads;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    threads.reserve(k);
    for (int w = 0; w < k; ++w) {
        const long lo = n * w / k;
        const long hi = n * (w + 1) / k;
        threads.emplace_back([&, lo, hi] {
            try {
                for (long i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace exitsim
