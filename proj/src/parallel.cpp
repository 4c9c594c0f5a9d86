#include "tsfeat/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace tsfeat {

namespace {

std::atomic<std::size_t> g_threads{0};
thread_local bool t_in_worker = false;

struct WorkerScope {
    bool saved = t_in_worker;
    WorkerScope() { t_in_worker = true; }
    ~WorkerScope() { t_in_worker = saved; }
};

std::size_t default_threads() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

}  // namespace

void set_thread_count(std::size_t n) { g_threads.store(n); }

std::size_t thread_count() {
    const std::size_t n = g_threads.load();
    return n == 0 ? default_threads() : n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    // Nested calls run inline on the calling worker.
    const std::size_t workers = t_in_worker ? 1 : std::min(thread_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }

    // Every index runs even after a failure so that the reported error is
    // always the one from the lowest failing index.
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::size_t first_error_index = n;
    std::mutex error_mutex;

    auto run = [&] {
        WorkerScope scope;
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (i < first_error_index) {
                    first_error_index = i;
                    first_error = std::current_exception();
                }
            }
        }
    };

    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
    pool.clear();  // joins

    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace tsfeat
