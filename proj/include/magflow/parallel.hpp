#pragma once
//
// Deterministic parallel map: results land at the input index, whatever the schedule.
//

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace magflow {

inline int default_workers() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

/// out[i] = fn(i) for i in [0, n). The first exception (lowest index) is rethrown.
template <class R, class Fn>
std::vector<R> parallel_map(std::size_t n, int workers, Fn&& fn) {
    std::vector<R> out(n);
    if (n == 0) return out;
    const int w = std::max(1, std::min<int>(workers, static_cast<int>(n)));
    if (w == 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                out[i] = fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (int t = 0; t < w; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

}  // namespace magflow
