#ifndef PIXANT_RESPONSE_HPP
#define PIXANT_RESPONSE_HPP

#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include "pixant/errors.hpp"
#include "pixant/sweep.hpp"

namespace pixant {

using Complex = std::complex<double>;

/// Scalar reflection coefficient at the external port.
inline Complex reflection(Complex z_in, double z0) {
    const Complex den = z_in + z0;
    if (std::abs(den) < 1e-12)
        throw DegenerateLoad("z_in + z0 is numerically zero");
    return (z_in - z0) / den;
}

/// Magnitude in dB, floored at -100 dB. The floor only engages for
/// |gamma| < 1e-5, i.e. below any threshold an objective ever uses.
inline double gamma_to_db(Complex gamma) {
    const double mag = std::abs(gamma);
    if (mag < 1e-5) return -100.0;
    return 20.0 * std::log10(mag);
}

/// Per-frequency complex reflection coefficient at the external port plus its
/// dB magnitude.
struct ReflectionCurve {
    FrequencySweep sweep;
    std::vector<Complex> gamma;
    std::vector<double> mag_db;

    static ReflectionCurve from_gamma(FrequencySweep sweep, std::vector<Complex> gamma) {
        if (sweep.size() != gamma.size())
            throw LengthMismatch("reflection curve: sweep and gamma lengths differ");
        ReflectionCurve curve;
        curve.mag_db.reserve(gamma.size());
        for (const Complex& g : gamma) curve.mag_db.push_back(gamma_to_db(g));
        curve.sweep = std::move(sweep);
        curve.gamma = std::move(gamma);
        return curve;
    }

    std::size_t size() const { return gamma.size(); }
};

} // namespace pixant

#endif // PIXANT_RESPONSE_HPP
