#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace medianshape {

/// Worker cap: MEDIANSHAPE_THREADS when set to a positive integer, else hardware concurrency.
inline std::size_t thread_cap()
{
    if (const char* env = std::getenv("MEDIANSHAPE_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<std::size_t>(v);
        } catch (...) {
        }
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Calls body(begin, end) on contiguous slices of [0, n). Slices are disjoint, so bodies
/// that write only to their own indices give results independent of scheduling.
template <class Body>
void parallel_for(std::size_t n, Body&& body, std::size_t min_slice = 64)
{
    const std::size_t workers = std::min(thread_cap(), (n + min_slice - 1) / std::max<std::size_t>(min_slice, 1));
    if (workers <= 1) {
        body(std::size_t{0}, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t slice = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * slice;
        const std::size_t end = std::min(n, begin + slice);
        if (begin >= end) break;
        pool.emplace_back([&body, begin, end] { body(begin, end); });
    }
    for (auto& t : pool) t.join();
}

} // namespace medianshape
