#include "parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace angiokit::detail {

namespace {

std::atomic<unsigned> g_override{0};

unsigned env_threads() {
    const char* env = std::getenv("ANGIOKIT_THREADS");
    if (env == nullptr || *env == '\0') return 0;
    try {
        const long v = std::stol(env);
        return v > 0 ? static_cast<unsigned>(v) : 1U;
    } catch (...) {
        return 0;
    }
}

}  // namespace

unsigned max_threads() {
    if (const unsigned o = g_override.load(); o > 0) return o;
    if (const unsigned e = env_threads(); e > 0) return e;
    return std::max(1U, std::thread::hardware_concurrency());
}

void set_max_threads(unsigned n) { g_override.store(n); }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const std::size_t workers = std::min<std::size_t>(max_threads(), n);
    if (workers <= 1 || n < 64) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&body, begin, end] {
            for (std::size_t i = begin; i < end; ++i) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace angiokit::detail
