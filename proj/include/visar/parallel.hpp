#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace visar {

/// Runs fn(0..n-1) on up to `workers` threads, any completion order. The
/// first exception wins and is rethrown after all threads join. Callers are
/// responsible for writing results into index-addressed slots so the output
/// does not depend on scheduling.
template <typename Fn>
void parallel_for(size_t n, int workers, Fn&& fn) {
    size_t t_count = std::min<size_t>(static_cast<size_t>(std::max(workers, 1)), n);
    if (t_count <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (true) {
            size_t i = next.fetch_add(1);
            if (i >= n) break;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> threads;
    threads.reserve(t_count);
    for (size_t t = 0; t < t_count; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace visar
