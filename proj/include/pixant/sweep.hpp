#ifndef PIXANT_SWEEP_HPP
#define PIXANT_SWEEP_HPP

#include <utility>
#include <vector>

#include "pixant/errors.hpp"

namespace pixant {

/// Frequency grid in GHz. Uniform when built from (f_start, f_stop, n_points);
/// file-loaded sweeps may be non-uniform, so consumers must not assume
/// constant spacing.
class FrequencySweep {
public:
    FrequencySweep() = default;

    static FrequencySweep uniform(double f_start_ghz, double f_stop_ghz, int n_points) {
        if (!(f_start_ghz > 0.0) || !(f_start_ghz < f_stop_ghz))
            throw ConfigError("sweep requires 0 < f_start < f_stop");
        if (n_points < 2) throw ConfigError("sweep requires n_points >= 2");
        std::vector<double> f(static_cast<std::size_t>(n_points));
        const double step = (f_stop_ghz - f_start_ghz) / (n_points - 1);
        for (int i = 0; i < n_points; ++i) f[static_cast<std::size_t>(i)] = f_start_ghz + step * i;
        f.back() = f_stop_ghz;
        return FrequencySweep(std::move(f));
    }

    static FrequencySweep from_list(std::vector<double> freq_ghz) {
        if (freq_ghz.empty()) throw ConfigError("sweep frequency list is empty");
        if (!(freq_ghz.front() > 0.0)) throw ConfigError("sweep frequencies must be positive");
        for (std::size_t i = 1; i < freq_ghz.size(); ++i)
            if (!(freq_ghz[i] > freq_ghz[i - 1]))
                throw ConfigError("sweep frequencies must be strictly ascending");
        return FrequencySweep(std::move(freq_ghz));
    }

    /// 1-11 GHz, 201 points; covers both stock design bands.
    static FrequencySweep standard() { return uniform(1.0, 11.0, 201); }

    const std::vector<double>& freq_ghz() const { return freq_; }
    std::size_t size() const { return freq_.size(); }
    double f_start() const { return freq_.front(); }
    double f_stop() const { return freq_.back(); }
    double operator[](std::size_t i) const { return freq_[i]; }

    friend bool operator==(const FrequencySweep& a, const FrequencySweep& b) {
        return a.freq_ == b.freq_;
    }

private:
    explicit FrequencySweep(std::vector<double> f) : freq_(std::move(f)) {}
    std::vector<double> freq_;
};

} // namespace pixant

#endif // PIXANT_SWEEP_HPP
