#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace gmtlab::par {

// Work is always split into a fixed number of chunks; the worker count only
// decides how chunks are scheduled. Per-chunk results combined in chunk order
// are therefore bit-identical for any worker count.

inline int& worker_count_slot() {
    static int workers = 1;
    return workers;
}

inline void set_worker_count(int n) { worker_count_slot() = n < 1 ? 1 : n; }
inline int worker_count() { return worker_count_slot(); }

inline constexpr std::size_t kDefaultChunks = 64;

/// Invokes fn(chunk_index, begin, end) for every chunk of [0, total).
template <class Fn>
void for_chunks(std::size_t total, std::size_t n_chunks, Fn&& fn) {
    if (total == 0) return;
    if (n_chunks > total) n_chunks = total;
    auto chunk_bounds = [&](std::size_t c) {
        const std::size_t b = c * total / n_chunks;
        const std::size_t e = (c + 1) * total / n_chunks;
        return std::pair<std::size_t, std::size_t>{b, e};
    };
    const int workers = worker_count();
    if (workers == 1 || n_chunks == 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) {
            auto [b, e] = chunk_bounds(c);
            fn(c, b, e);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    auto drain = [&] {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= n_chunks) break;
            auto [b, e] = chunk_bounds(c);
            fn(c, b, e);
        }
    };
    std::vector<std::thread> pool;
    const std::size_t n_threads =
        std::min<std::size_t>(static_cast<std::size_t>(workers), n_chunks);
    pool.reserve(n_threads - 1);
    for (std::size_t t = 0; t + 1 < n_threads; ++t) pool.emplace_back(drain);
    drain();
    for (auto& th : pool) th.join();
}

}  // namespace gmtlab::par
