#ifndef PIXANT_FEATURES_HPP
#define PIXANT_FEATURES_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "pixant/errors.hpp"
#include "pixant/response.hpp"

namespace pixant {

/// Response features: Q resonance frequencies (GHz, ascending) with their
/// reflection levels (dB).
struct FeatureVector {
    std::vector<double> omega_ghz;
    std::vector<double> level_db;

    std::size_t size() const { return omega_ghz.size(); }
};

namespace detail {

/// Interior samples strictly below both neighbors.
inline std::vector<std::size_t> local_minima_indices(const std::vector<double>& levels) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 1; i + 1 < levels.size(); ++i)
        if (levels[i] < levels[i - 1] && levels[i] < levels[i + 1]) idx.push_back(i);
    return idx;
}

/// Vertex of the parabola through three samples around a grid minimum.
/// Works on non-uniform grids; falls back to the grid point when the
/// curvature is not positive.
inline std::pair<double, double> parabolic_vertex(double x0, double y0, double x1, double y1,
                                                  double x2, double y2) {
    const double d1 = (y1 - y0) / (x1 - x0);
    const double d2 = (y2 - y1) / (x2 - x1);
    const double curv = (d2 - d1) / (x2 - x0);
    if (!(curv > 0.0)) return {x1, y1};
    double xv = 0.5 * (x0 + x1) - d1 / (2.0 * curv);
    xv = std::clamp(xv, x0, x2);
    const double yv = y0 + d1 * (xv - x0) + curv * (xv - x0) * (xv - x1);
    return {xv, yv};
}

} // namespace detail

/// Extracts the q deepest resonances: grid local minima refined by 3-point
/// parabolic interpolation, returned sorted by frequency.
inline FeatureVector extract_features(const std::vector<double>& freqs,
                                      const std::vector<double>& levels, int q) {
    if (freqs.size() != levels.size())
        throw LengthMismatch("feature extraction: frequency and level lengths differ");
    if (freqs.size() < 3) throw ConfigError("feature extraction needs at least 3 samples");
    if (q < 1) throw ConfigError("feature extraction needs q >= 1");

    std::vector<std::size_t> minima = detail::local_minima_indices(levels);
    if (static_cast<int>(minima.size()) < q)
        throw InsufficientResonances("curve has fewer local minima than requested features");

    // Deepest q by grid level; ties resolved toward lower frequency.
    std::stable_sort(minima.begin(), minima.end(),
                     [&](std::size_t a, std::size_t b) { return levels[a] < levels[b]; });
    minima.resize(static_cast<std::size_t>(q));

    std::vector<std::pair<double, double>> refined;
    refined.reserve(minima.size());
    for (std::size_t i : minima)
        refined.push_back(detail::parabolic_vertex(freqs[i - 1], levels[i - 1], freqs[i],
                                                   levels[i], freqs[i + 1], levels[i + 1]));
    std::sort(refined.begin(), refined.end());

    FeatureVector fv;
    fv.omega_ghz.reserve(refined.size());
    fv.level_db.reserve(refined.size());
    for (const auto& [f, l] : refined) {
        fv.omega_ghz.push_back(f);
        fv.level_db.push_back(l);
    }
    return fv;
}

inline FeatureVector extract_features(const ReflectionCurve& curve, int q) {
    return extract_features(curve.sweep.freq_ghz(), curve.mag_db, q);
}

/// Level at an arbitrary in-sweep frequency: exact sample on grid points,
/// linear interpolation between them.
inline double level_at_frequency(const std::vector<double>& freqs,
                                 const std::vector<double>& levels, double f) {
    if (freqs.size() != levels.size())
        throw LengthMismatch("level lookup: frequency and level lengths differ");
    if (freqs.empty() || f < freqs.front() || f > freqs.back())
        throw OutOfRange("frequency outside the sweep range");
    const auto it = std::lower_bound(freqs.begin(), freqs.end(), f);
    const std::size_t hi = static_cast<std::size_t>(it - freqs.begin());
    if (hi < freqs.size() && freqs[hi] == f) return levels[hi];
    const std::size_t lo = hi - 1;
    const double t = (f - freqs[lo]) / (freqs[hi] - freqs[lo]);
    return levels[lo] + t * (levels[hi] - levels[lo]);
}

inline double level_at_frequency(const ReflectionCurve& curve, double f) {
    return level_at_frequency(curve.sweep.freq_ghz(), curve.mag_db, f);
}

} // namespace pixant

#endif // PIXANT_FEATURES_HPP
