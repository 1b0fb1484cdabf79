#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace deid {

/// Run fn(block_index, begin, end) over fixed-size blocks of [0, n). The
/// block partition does not depend on the thread count, so callers that
/// write per-block outputs and reduce them in block order get bit-identical
/// results at any thread count. threads <= 1 runs inline.
inline void for_each_block(std::size_t n, std::size_t block_size, int threads,
                           const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    const std::size_t num_blocks = (n + block_size - 1) / block_size;
    if (threads <= 1) {
        for (std::size_t b = 0; b < num_blocks; ++b)
            fn(b, b * block_size, std::min(n, (b + 1) * block_size));
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t b = next.fetch_add(1); b < num_blocks; b = next.fetch_add(1))
            fn(b, b * block_size, std::min(n, (b + 1) * block_size));
    };
    std::vector<std::thread> pool;
    const std::size_t want = std::min<std::size_t>(static_cast<std::size_t>(threads), num_blocks);
    pool.reserve(want);
    for (std::size_t i = 0; i < want; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
}

inline constexpr std::size_t kGradientBlockSize = 64;

}  // namespace deid
