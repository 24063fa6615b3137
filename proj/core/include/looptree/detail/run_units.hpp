#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace looptree {

template <class Result>
std::vector<Result> run_units(std::uint64_t units, unsigned workers, const std::function<Result(std::uint64_t)>& work)
{
    std::vector<Result> results(units);
    if (units == 0) return results;
    workers = std::max(1U, std::min<unsigned>(workers, static_cast<unsigned>(std::min<std::uint64_t>(units, 1024))));
    if (workers == 1) {
        for (std::uint64_t i = 0; i < units; ++i) results[i] = work(i);
        return results;
    }

    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto loop = [&] {
        for (;;) {
            const std::uint64_t i = next.fetch_add(1);
            if (i >= units) return;
            try {
                results[i] = work(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(units);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(loop);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return results;
}

} // namespace looptree
