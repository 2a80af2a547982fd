#include "repeval/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "repeval/errors.hpp"

namespace repeval {

void run_indexed(std::size_t count, unsigned workers,
                 const std::function<void(std::size_t)>& fn) {
    if (workers == 0) throw ValidationError("worker count must be >= 1");
    if (count == 0) return;

    if (workers == 1 || count == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    std::size_t first_error_index = count;

    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                // Keep the error of the lowest index so failures are
                // deterministic under any interleaving.
                if (i < first_error_index) {
                    first_error_index = i;
                    first_error = std::current_exception();
                }
            }
        }
    };

    const unsigned n_threads =
        static_cast<unsigned>(std::min<std::size_t>(workers, count));
    std::vector<std::thread> threads;
    threads.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) threads.emplace_back(body);
    for (auto& t : threads) t.join();

    if (first_error) std::rethrow_exception(first_error);
}

unsigned default_workers() {
    const char* env = std::getenv("REPEVAL_WORKERS");
    if (env == nullptr || *env == '\0') return 1;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) {
        throw ValidationError("REPEVAL_WORKERS must be a positive integer");
    }
    return static_cast<unsigned>(v);
}

}  // namespace repeval
