#pragma once

#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "funreg/grid.hpp"

namespace funreg {

/// Static-chunked parallel loop. Results must be written to caller-owned slots
/// indexed by i so the outcome is independent of the worker count.
template <typename Fn>
void parallel_for(Index n, int jobs, Fn&& fn) {
    if (n <= 0) return;
    if (jobs <= 1 || n == 1) {
        for (Index i = 0; i < n; ++i) fn(i);
        return;
    }
    int workers = static_cast<int>(std::min<Index>(jobs, n));
    std::vector<std::thread> threads;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int t = 0; t < workers; ++t) {
        threads.emplace_back([&, t]() {
            try {
                for (Index i = t; i < n; i += workers) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& th : threads) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace funreg
