#pragma once

#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace lcp {

/// Runs fn(i) for i in [0, n) across `threads` workers. Each index is
/// processed exactly once and workers write only to their own slots, so the
/// outcome is identical for any worker count; threads <= 1 runs inline.
/// The first exception thrown by any worker is rethrown after all join.
template <typename Fn>
void parallel_for(std::int64_t n, int threads, Fn&& fn) {
    if (n <= 0) {
        return;
    }
    if (threads <= 1 || n == 1) {
        for (std::int64_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    const int workers = static_cast<int>(threads < n ? threads : n);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            try {
                for (std::int64_t i = w; i < n; i += workers) {
                    fn(i);
                }
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

}  // namespace lcp
