#pragma once

#include "trackfuse/error.hpp"
#include "trackfuse/scenarios.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace trackfuse::detail {

/// Calls body(r) for r in [0, runs) on up to `threads` workers. Results must
/// be written to per-run slots so the outcome does not depend on scheduling.
template <class Body>
void parallel_runs(int runs, int threads, Body&& body)
{
    const int workers = std::max(1, std::min(threads, runs));
    if (workers == 1) {
        for (int r = 0; r < runs; ++r) {
            body(r);
        }
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int r = next++; r < runs; r = next++) {
                try {
                    body(r);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
}

inline void check_failure_rate(const std::string& fuser, std::size_t failures, int runs)
{
    if (static_cast<double>(failures) > 0.01 * runs) {
        throw ScenarioAborted("fuser '" + fuser + "' failed in " + std::to_string(failures) + " of "
                              + std::to_string(runs) + " runs (more than 1%)");
    }
}

RunReport run_linear(const ScenarioConfig& cfg);
RunReport run_scalar(const ScenarioConfig& cfg);
RunReport run_surveillance(const ScenarioConfig& cfg);

} // namespace trackfuse::detail
