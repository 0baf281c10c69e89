#ifndef PIXANT_TESTS_FINITE_LOAD_HPP
#define PIXANT_TESTS_FINITE_LOAD_HPP

// Test-only general finite-load reduction: every port keeps its row/column
// and contributes a diagonal load impedance. Open ports get a huge finite
// load instead of being deleted, which lets the suite check that deletion is
// the correct infinite-load limit.

#include <Eigen/Dense>
#include <vector>

#include "pixant/impm.hpp"

namespace pixant::testing {

inline Complex reduce_with_finite_loads(const PartitionedZ& p, std::size_t fi,
                                        const std::vector<double>& loads_ohm) {
    const int m = p.m();
    if (static_cast<int>(loads_ohm.size()) != m)
        throw LengthMismatch("finite-load reduction: wrong load count");
    if (m == 0) return p.z_a[fi];
    Eigen::MatrixXcd loaded = p.z_d[fi];
    for (int k = 0; k < m; ++k) loaded(k, k) += loads_ohm[static_cast<std::size_t>(k)];
    // Meshes of zero-load ports leave the loaded matrix rank-deficient but
    // consistent; the rank-revealing solve matches the library's handling.
    const Eigen::VectorXcd x =
        loaded.completeOrthogonalDecomposition().solve(p.z_c[fi]);
    return p.z_a[fi] - (p.z_b[fi] * x).value();
}

inline std::vector<Complex> reduce_with_finite_loads(const PartitionedZ& p,
                                                     const std::vector<double>& loads_ohm) {
    std::vector<Complex> z;
    z.reserve(p.n_freq());
    for (std::size_t fi = 0; fi < p.n_freq(); ++fi)
        z.push_back(reduce_with_finite_loads(p, fi, loads_ohm));
    return z;
}

} // namespace pixant::testing

#endif // PIXANT_TESTS_FINITE_LOAD_HPP
