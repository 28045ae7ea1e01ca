#pragma once

#include <cstdint>
#include <thread>
#include <vector>

namespace imgcf {

// Runs fn(begin, end) over contiguous blocks of [0, n). With threads <= 1 the
// call runs inline on the calling thread. Blocks are disjoint, so any
// row-partitioned computation is bit-identical at every thread count.
template <typename Fn>
void parallel_for(std::int64_t n, int threads, Fn&& fn) {
    if (n <= 0) return;
    if (threads <= 1 || n == 1) {
        fn(std::int64_t{0}, n);
        return;
    }
    const int workers = static_cast<int>(std::min<std::int64_t>(threads, n));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    const std::int64_t chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const std::int64_t begin = w * chunk;
        const std::int64_t end = std::min<std::int64_t>(begin + chunk, n);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    for (auto& t : pool) {
        t.join();
    }
}

}  // namespace imgcf
