#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sitc {

/// Worker count used when the caller passes 0.
inline std::size_t default_workers() {
    auto hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Runs fn(index, worker) for index in [0, count) on `workers` threads. Work is
/// handed out in chunks from a shared counter; callers write results into
/// per-index slots so output never depends on scheduling. The first exception
/// thrown by any worker is rethrown after all workers join.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn, std::size_t chunk = 16) {
    if (workers == 0) workers = default_workers();
    workers = std::max<std::size_t>(1, std::min(workers, (count + chunk - 1) / std::max<std::size_t>(chunk, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i, std::size_t{0});
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&](std::size_t worker) {
        try {
            while (true) {
                auto begin = next.fetch_add(chunk);
                if (begin >= count) break;
                auto end = std::min(count, begin + chunk);
                for (auto i = begin; i < end; ++i) fn(i, worker);
            }
        } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            next.store(count);
        }
    };
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers - 1);
        for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(body, w);
        body(0);
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace sitc
