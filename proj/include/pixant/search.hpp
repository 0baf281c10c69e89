#ifndef PIXANT_SEARCH_HPP
#define PIXANT_SEARCH_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "pixant/errors.hpp"
#include "pixant/impm.hpp"
#include "pixant/parallel.hpp"

namespace pixant {

struct SearchOptions {
    bool keep_table = true;
    int threads = 0;  // 0 = available parallelism
};

struct SearchResult {
    PortConfiguration best_config;
    double best_value = std::numeric_limits<double>::infinity();
    std::uint32_t best_index = 0;
    std::uint64_t evaluated_count = 0;
    std::optional<std::vector<double>> value_table;  // config index -> objective
};

using CurveObjective = std::function<double(const ReflectionCurve&)>;

/// Enumerates all 2^m port configurations on the partitioned matrix and
/// returns the minimizer. Pure post-processing: no backend involvement.
/// Failing configurations score +infinity; ties break toward the smallest
/// binary index, so the result is independent of evaluation order.
inline SearchResult exhaustive_search(const PartitionedZ& p, const CurveObjective& objective,
                                      int m, double z0, const SearchOptions& opts = {}) {
    if (m > 24) throw TooManyPorts("exhaustive search supports at most 24 ports");
    if (m < 0 || m != p.m())
        throw ConfigError("exhaustive search: m does not match the partitioned matrix");

    const std::uint64_t count = std::uint64_t{1} << m;
    SearchResult result;
    result.evaluated_count = count;
    if (opts.keep_table)
        result.value_table.emplace(count, std::numeric_limits<double>::infinity());

    const int workers = detail::resolve_threads(opts.threads);
    std::vector<double> worker_best(static_cast<std::size_t>(workers),
                                    std::numeric_limits<double>::infinity());
    std::vector<std::uint64_t> worker_idx(static_cast<std::size_t>(workers), 0);

    detail::parallel_chunks(count, workers, [&](std::size_t begin, std::size_t end, int w) {
        double best = std::numeric_limits<double>::infinity();
        std::uint64_t best_i = begin;
        for (std::size_t i = begin; i < end; ++i) {
            double u = std::numeric_limits<double>::infinity();
            try {
                const PortConfiguration y =
                    PortConfiguration::from_index(static_cast<std::uint32_t>(i),
                                                  static_cast<std::size_t>(m));
                u = objective(evaluate_configuration(p, y, z0));
                if (std::isnan(u)) u = std::numeric_limits<double>::infinity();
            } catch (const Error&) {
                u = std::numeric_limits<double>::infinity();
            }
            if (result.value_table) (*result.value_table)[i] = u;
            if (u < best) {
                best = u;
                best_i = i;
            }
        }
        worker_best[static_cast<std::size_t>(w)] = best;
        worker_idx[static_cast<std::size_t>(w)] = best_i;
    });

    double best = std::numeric_limits<double>::infinity();
    std::uint64_t best_i = 0;
    for (std::size_t w = 0; w < worker_best.size(); ++w) {
        if (worker_best[w] < best || (worker_best[w] == best && worker_idx[w] < best_i)) {
            best = worker_best[w];
            best_i = worker_idx[w];
        }
    }
    result.best_value = best;
    result.best_index = static_cast<std::uint32_t>(best_i);
    result.best_config =
        PortConfiguration::from_index(result.best_index, static_cast<std::size_t>(m));
    return result;
}

} // namespace pixant

#endif // PIXANT_SEARCH_HPP
