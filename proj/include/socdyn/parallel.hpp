#pragma once
// Index-based work distribution.  Results must be written to preallocated
// per-index slots; combined with counter-based random streams this makes
// every computation independent of the worker count and schedule.

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace socdyn {

template <class Fn>
void parallel_for(int count, int workers, Fn&& fn) {
    if (count <= 0) return;
    if (workers < 1) workers = 1;
    if (workers > count) workers = count;
    if (workers == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }

    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto run = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace socdyn
