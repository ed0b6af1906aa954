#pragma once
// Work splitting for the enumeration engines. Items are independent and
// results are written into per-item slots, so the merged result never
// depends on how many threads ran.

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lo {

/// Worker count: the override if set, else LO_THREADS, else hardware cores.
std::size_t thread_count();

/// Overrides LO_THREADS for this process; 0 restores the environment value.
void set_thread_count(std::size_t threads);

/// Calls body(i) for every i in [0, count), on up to thread_count() threads.
/// The first exception thrown by any item is rethrown after all workers join.
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
    const std::size_t workers = std::min(thread_count(), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < count; i += workers) body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace lo
