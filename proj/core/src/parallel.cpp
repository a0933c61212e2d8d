#include "ustat/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace ustat {
namespace {

std::atomic<unsigned> g_default_threads{0};
thread_local bool t_inside_worker = false;

unsigned env_threads() {
    const char* raw = std::getenv("USTAT_THREADS");
    if (raw == nullptr || *raw == '\0') return 0;
    try {
        const long v = std::stol(raw);
        return v > 0 ? static_cast<unsigned>(v) : 0U;
    } catch (const std::exception&) {
        return 0;
    }
}

}  // namespace

void set_default_threads(unsigned threads) { g_default_threads.store(threads); }

unsigned default_threads() {
    if (const unsigned t = g_default_threads.load(); t > 0) return t;
    if (const unsigned t = env_threads(); t > 0) return t;
    return std::max(1U, std::thread::hardware_concurrency());
}

unsigned resolve_threads(unsigned requested) {
    return requested > 0 ? requested : default_threads();
}

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body) {
    if (count == 0) return;
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), count));
    if (workers <= 1 || t_inside_worker) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto run = [&] {
        t_inside_worker = true;
        for (;;) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= count) break;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(count);
            }
        }
        t_inside_worker = false;
    };

    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace ustat
