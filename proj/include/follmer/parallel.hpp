#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace follmer {

// Runs body(i) for i in [0, n) on up to `threads` workers using contiguous
// blocks. Each index must write only to its own output slot. If several
// indices throw, the exception of the lowest index is rethrown, so the
// observable outcome does not depend on the thread count.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body)
{
    if (n == 0) return;
    const std::size_t workers = std::clamp<std::size_t>(threads == 0 ? 1 : threads, 1, n);
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }

    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::size_t> error_index(workers, n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t block = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            const std::size_t lo = w * block;
            const std::size_t hi = std::min(n, lo + block);
            for (std::size_t i = lo; i < hi; ++i) {
                try {
                    body(i);
                } catch (...) {
                    errors[w] = std::current_exception();
                    error_index[w] = i;
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();

    // Blocks are ordered by index, so the first failing block holds the lowest index.
    for (std::size_t w = 0; w < workers; ++w) {
        if (errors[w]) std::rethrow_exception(errors[w]);
    }
}

} // namespace follmer
