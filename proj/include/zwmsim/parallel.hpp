#pragma once

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace zwmsim {

/// Worker cap: min(hardware concurrency, ZWM_SIM_THREADS when set).
inline int max_workers() {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1)
        n = 1;
    if (const char* env = std::getenv("ZWM_SIM_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1 && cap < n)
            n = cap;
    }
    return n;
}

/// Chunked parallel loop over [0, n). f must be pure per index.
template <typename F>
void parallel_for(int n, F&& f) {
    const int workers = std::min(max_workers(), n);
    if (workers <= 1 || n < 256) {
        for (int i = 0; i < n; ++i)
            f(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (int i = w; i < n; i += workers)
                f(i);
        });
    }
    for (auto& t : pool)
        t.join();
}

} // namespace zwmsim
