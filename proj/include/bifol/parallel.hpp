#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace bifol {

// Process-wide worker count.  0 means "use hardware concurrency".
// Deterministic results are preserved regardless of the setting because
// every parallel_for body writes only to its own index.
inline std::atomic<int>& thread_count() {
    static std::atomic<int> n{1};
    return n;
}

inline void set_thread_count(int n) { thread_count().store(n < 0 ? 1 : n); }

inline int effective_threads(std::size_t work_items) {
    int n = thread_count().load();
    if (n == 0) n = int(std::thread::hardware_concurrency());
    if (n <= 0) n = 1;
    if (std::size_t(n) > work_items) n = int(work_items);
    return n;
}

// Runs body(i) for i in [0, count).  Exceptions from workers are rethrown
// on the calling thread (first one wins).
template <typename Body>
void parallel_for(std::size_t count, const Body& body) {
    if (count == 0) return;
    const int workers = effective_threads(count);
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::atomic<bool> failed{false};
    auto run = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count || failed.load(std::memory_order_relaxed)) return;
            try {
                body(i);
            } catch (...) {
                if (!failed.exchange(true)) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (int t = 1; t < workers; ++t) pool.emplace_back(run);
    run();
    for (auto& th : pool) th.join();
    if (failed.load() && first_error) std::rethrow_exception(first_error);
}

}  // namespace bifol
