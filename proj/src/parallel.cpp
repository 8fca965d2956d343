#include "gprt/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace gprt {

namespace {
int g_thread_count = 0;

int resolve_threads() {
    if (g_thread_count > 0) return g_thread_count;
    if (const char* env = std::getenv("GPRT_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? int(hw) : 1;
}
}  // namespace

void set_thread_count(int n) { g_thread_count = n; }

int thread_count() { return resolve_threads(); }

void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t, std::int64_t)>& fn) {
    std::int64_t count = end - begin;
    if (count <= 0) return;
    int workers = std::min<std::int64_t>(resolve_threads(), count);
    if (workers <= 1) {
        fn(begin, end);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    std::int64_t chunk = (count + workers - 1) / workers;
    for (int t = 1; t < workers; ++t) {
        std::int64_t lo = begin + t * chunk;
        std::int64_t hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
    }
    fn(begin, std::min(end, begin + chunk));
    for (auto& th : pool) th.join();
}

}  // namespace gprt
