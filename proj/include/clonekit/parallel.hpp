#pragma once

#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace clonekit {

/// Runs `work(worker, workers)` on `workers` threads (inline when 1) and
/// rethrows the first exception any of them raised.
template <typename Work>
void run_workers(unsigned workers, Work&& work)
{
    if (workers <= 1) {
        work(0u, 1u);
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            try {
                work(w, workers);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
            }
        });
    for (auto& t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
}

} // namespace clonekit
