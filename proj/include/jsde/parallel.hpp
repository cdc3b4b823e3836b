#pragma once

// Index-keyed parallel loop. Work items are pure functions of their index,
// so scheduling order can never influence results; exceptions from workers
// are rethrown on the caller's thread.

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace jsde::detail {

inline void parallel_for(std::size_t n, int width, const std::function<void(std::size_t)>& fn) {
    width = std::max(1, width);
    if (width == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(width));
    for (int w = 0; w < width; ++w) {
        workers.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mu);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : workers) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace jsde::detail
