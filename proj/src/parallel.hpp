#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <thread>
#include <vector>

namespace rbig {

// Worker count: hardware concurrency, optionally capped by RBIG_THREADS.
inline std::size_t worker_count() {
    std::size_t n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("RBIG_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1) n = std::min<std::size_t>(n, static_cast<std::size_t>(cap));
    }
    return n;
}

// Calls body(begin, end) over contiguous chunks of [0, count). Each index is
// handled by exactly one call, so per-index results do not depend on the
// schedule.
template <class Body>
void parallel_for(std::size_t count, Body&& body, std::size_t min_chunk = 256) {
    const std::size_t workers = std::min(worker_count(), (count + min_chunk - 1) / std::max<std::size_t>(min_chunk, 1));
    if (workers <= 1) {
        body(std::size_t{0}, count);
        return;
    }
    const std::size_t chunk = (count + workers - 1) / workers;
    std::vector<std::jthread> threads;
    threads.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) {
        const std::size_t b = w * chunk;
        const std::size_t e = std::min(count, b + chunk);
        if (b >= e) break;
        threads.emplace_back([&body, b, e] { body(b, e); });
    }
    body(std::size_t{0}, std::min(count, chunk));
}

}  // namespace rbig
