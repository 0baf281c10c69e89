#ifndef PIXANT_OBJECTIVES_HPP
#define PIXANT_OBJECTIVES_HPP

#include <algorithm>
#include <cmath>
#include <variant>
#include <vector>

#include "pixant/errors.hpp"
#include "pixant/features.hpp"
#include "pixant/response.hpp"

namespace pixant {

/// Min-max in-band objective: worst clamped violation of the reflection
/// threshold inside [f_low, f_high]. Zero iff the whole band is compliant.
struct BroadbandObjective {
    double f_low_ghz = 3.8;
    double f_high_ghz = 10.0;
    double threshold_db = -10.0;

    void validate() const {
        if (!(f_low_ghz < f_high_ghz))
            throw ConfigError("broadband objective requires f_low < f_high");
    }
};

/// Scaled dual-band objective: the second band is pinned at K times the first
/// resonance frequency.
struct DualBandObjective {
    double threshold_db = -15.0;
    double k = 2.0;

    void validate() const {
        if (!(k > 1.0)) throw ConfigError("dual-band objective requires K > 1");
    }
};

/// Feature-space objective: weighted worst level violation plus the Euclidean
/// distance of the resonance frequencies from their targets.
struct FeatureObjective {
    std::vector<double> targets_ghz = {3.0, 6.0};
    double threshold_db = -15.0;
    double beta1 = 10.0;

    void validate() const {
        if (!(beta1 > 0.0)) throw ConfigError("feature objective requires beta1 > 0");
        if (targets_ghz.empty()) throw ConfigError("feature objective requires at least one target");
        for (std::size_t i = 1; i < targets_ghz.size(); ++i)
            if (!(targets_ghz[i] > targets_ghz[i - 1]))
                throw ConfigError("feature objective targets must be strictly ascending");
    }
};

using ObjectiveSpec = std::variant<BroadbandObjective, DualBandObjective, FeatureObjective>;

inline void validate(const ObjectiveSpec& spec) {
    std::visit([](const auto& s) { s.validate(); }, spec);
}

inline double objective_broadband(const std::vector<double>& freqs,
                                  const std::vector<double>& levels,
                                  const BroadbandObjective& spec) {
    spec.validate();
    double u = 0.0;
    std::size_t in_band = 0;
    for (std::size_t i = 0; i < freqs.size(); ++i) {
        if (freqs[i] < spec.f_low_ghz || freqs[i] > spec.f_high_ghz) continue;
        ++in_band;
        u = std::max(u, std::max(levels[i] - spec.threshold_db, 0.0));
    }
    if (in_band < 2) throw EmptyBand("band intersects the sweep over fewer than 2 samples");
    return u;
}

inline double objective_broadband(const ReflectionCurve& curve, const BroadbandObjective& spec) {
    return objective_broadband(curve.sweep.freq_ghz(), curve.mag_db, spec);
}

/// f_r1 is the lowest-frequency local minimum at or below the threshold; when
/// none qualifies the deepest minimum stands in, which leaves the objective
/// large and positive for such responses. The companion resonance is read at
/// K * f_r1. Violations are not clamped at zero.
inline double objective_dualband(const std::vector<double>& freqs,
                                 const std::vector<double>& levels,
                                 const DualBandObjective& spec) {
    spec.validate();
    const std::vector<std::size_t> minima = detail::local_minima_indices(levels);
    if (minima.empty())
        throw InsufficientResonances("curve has no local minimum to anchor the first band");

    std::size_t first = minima.front();
    bool qualified = false;
    for (std::size_t i : minima) {
        if (levels[i] <= spec.threshold_db) {
            first = i;
            qualified = true;
            break;
        }
    }
    if (!qualified) {
        for (std::size_t i : minima)
            if (levels[i] < levels[first]) first = i;
    }

    const double f_r1 = freqs[first];
    const double f_r2 = spec.k * f_r1;
    if (f_r2 > freqs.back())
        throw OutOfRange("scaled second resonance lies beyond the sweep");
    const double u1 = levels[first] - spec.threshold_db;
    const double u2 = level_at_frequency(freqs, levels, f_r2) - spec.threshold_db;
    return std::max(u1, u2);
}

inline double objective_dualband(const ReflectionCurve& curve, const DualBandObjective& spec) {
    return objective_dualband(curve.sweep.freq_ghz(), curve.mag_db, spec);
}

inline double objective_feature(const FeatureVector& fv, const FeatureObjective& spec) {
    spec.validate();
    if (fv.omega_ghz.size() != fv.level_db.size())
        throw LengthMismatch("feature vector: omega and level lengths differ");
    if (fv.omega_ghz.size() != spec.targets_ghz.size())
        throw LengthMismatch("feature count does not match target count");
    double worst = fv.level_db.front() - spec.threshold_db;
    for (double l : fv.level_db) worst = std::max(worst, l - spec.threshold_db);
    double dist2 = 0.0;
    for (std::size_t i = 0; i < fv.omega_ghz.size(); ++i) {
        const double df = fv.omega_ghz[i] - spec.targets_ghz[i];
        dist2 += df * df;
    }
    return spec.beta1 * worst + std::sqrt(dist2);
}

/// Raw-curve objective dispatch (feature specs are not curve objectives).
inline double evaluate_curve_objective(const std::vector<double>& freqs,
                                       const std::vector<double>& levels,
                                       const ObjectiveSpec& spec) {
    if (const auto* b = std::get_if<BroadbandObjective>(&spec))
        return objective_broadband(freqs, levels, *b);
    if (const auto* d = std::get_if<DualBandObjective>(&spec))
        return objective_dualband(freqs, levels, *d);
    const auto& f = std::get<FeatureObjective>(spec);
    return objective_feature(extract_features(freqs, levels, static_cast<int>(f.targets_ghz.size())), f);
}

inline double evaluate_curve_objective(const ReflectionCurve& curve, const ObjectiveSpec& spec) {
    return evaluate_curve_objective(curve.sweep.freq_ghz(), curve.mag_db, spec);
}

} // namespace pixant

#endif // PIXANT_OBJECTIVES_HPP
