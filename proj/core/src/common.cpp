#include "splatgaze/common.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace splatgaze {

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 16) {
        double acc = 0.0;
        for (double v : values)
            acc += v;
        return acc;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

int worker_count() {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1)
        n = 1;
    if (const char* env = std::getenv("SPLATGAZE_THREADS")) {
        char* end = nullptr;
        long cap = std::strtol(env, &end, 10);
        if (end != env && cap >= 1)
            n = std::min<long>(n, cap);
    }
    return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const int workers = std::min<std::size_t>(worker_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1))
                fn(i);
        });
    }
    for (auto& t : pool)
        t.join();
}

} // namespace splatgaze
