#include "lo/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace lo {

namespace {
std::atomic<std::size_t> g_override{0};
}

std::size_t thread_count() {
    if (auto o = g_override.load(); o > 0) return o;
    if (const char* env = std::getenv("LO_THREADS")) {
        try {
            long v = std::stol(env);
            if (v > 0) return static_cast<std::size_t>(v);
        } catch (...) {
        }
    }
    auto hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

void set_thread_count(std::size_t threads) { g_override.store(threads); }

}  // namespace lo
