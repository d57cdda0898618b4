#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace mnr {

// Runs f(0), ..., f(count-1) on up to `threads` workers. Work items claim
// indices from a shared counter, so output written to slot i is identical
// regardless of thread count; the first exception is rethrown after join.
inline void parallel_for(int count, int threads, const std::function<void(int)> &f) {
    if (count <= 0)
        return;
    if (threads < 1)
        threads = 1;
    threads = std::min(threads, count);
    if (threads == 1) {
        for (int i = 0; i < count; ++i)
            f(i);
        return;
    }
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex err_mu;
    auto worker = [&]() {
        while (true) {
            const int i = next.fetch_add(1);
            if (i >= count || failed.load())
                return;
            try {
                f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!failed.exchange(true))
                    first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t)
        pool.emplace_back(worker);
    for (auto &th : pool)
        th.join();
    if (first_error)
        std::rethrow_exception(first_error);
}

} // namespace mnr
