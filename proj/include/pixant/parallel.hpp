#ifndef PIXANT_PARALLEL_HPP
#define PIXANT_PARALLEL_HPP

#include <exception>
#include <thread>
#include <vector>

namespace pixant::detail {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Runs fn(begin, end, chunk_index) over contiguous chunks of [0, n).
/// Exceptions are rethrown in chunk order, so failure reporting does not
/// depend on thread scheduling.
template <typename Fn>
void parallel_chunks(std::size_t n, int threads, Fn&& fn) {
    const int workers = std::min<std::size_t>(static_cast<std::size_t>(resolve_threads(threads)),
                                              n == 0 ? 1 : n);
    if (workers <= 1 || n <= 1) {
        fn(std::size_t{0}, n, 0);
        return;
    }
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    const std::size_t chunk = (n + static_cast<std::size_t>(workers) - 1) / static_cast<std::size_t>(workers);
    for (int w = 0; w < workers; ++w) {
        const std::size_t begin = static_cast<std::size_t>(w) * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        pool.emplace_back([&, begin, end, w] {
            try {
                if (begin < end) fn(begin, end, w);
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace pixant::detail

#endif // PIXANT_PARALLEL_HPP
