#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace fundsep {

// worker count: FUNDSEP_THREADS if set (>=1), else hardware concurrency
inline unsigned max_workers() {
    if (const char* env = std::getenv("FUNDSEP_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

// run fn(begin, end) over disjoint chunks of [0, n). Workers write to
// disjoint slots only, so results do not depend on the worker count.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
    const unsigned w = std::min<std::size_t>(max_workers(), std::max<std::size_t>(n, 1));
    if (w <= 1 || n < 2) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(w);
    const std::size_t chunk = (n + w - 1) / w;
    for (unsigned i = 0; i < w; ++i) {
        const std::size_t lo = std::min(n, i * chunk);
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back(fn, lo, hi);
    }
    for (auto& t : pool) t.join();
}

} // namespace fundsep
