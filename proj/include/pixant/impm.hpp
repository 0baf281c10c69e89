#ifndef PIXANT_IMPM_HPP
#define PIXANT_IMPM_HPP

#include <Eigen/Dense>
#include <vector>

#include "pixant/errors.hpp"
#include "pixant/multiport.hpp"
#include "pixant/response.hpp"

namespace pixant {

/// Per-frequency block partition of the N-port impedance matrix:
/// scalar external-port entry, the external-to-auxiliary coupling vectors,
/// and the M x M auxiliary-port block.
struct PartitionedZ {
    FrequencySweep sweep;
    std::vector<Complex> z_a;             // entry (1,1)
    std::vector<Eigen::RowVectorXcd> z_b; // row 1, columns 2..N
    std::vector<Eigen::VectorXcd> z_c;    // column 1, rows 2..N
    std::vector<Eigen::MatrixXcd> z_d;    // trailing M x M block

    int m() const { return z_d.empty() ? 0 : static_cast<int>(z_d.front().rows()); }
    std::size_t n_freq() const { return z_a.size(); }
};

inline PartitionedZ partition(const MultiportZ& z) {
    z.validate();
    const int n = z.n_ports();
    const int m = n - 1;
    PartitionedZ p;
    p.sweep = z.sweep;
    p.z_a.reserve(z.matrices.size());
    p.z_b.reserve(z.matrices.size());
    p.z_c.reserve(z.matrices.size());
    p.z_d.reserve(z.matrices.size());
    for (const Eigen::MatrixXcd& zf : z.matrices) {
        p.z_a.push_back(zf(0, 0));
        p.z_b.emplace_back(zf.row(0).segment(1, m));
        p.z_c.emplace_back(zf.col(0).segment(1, m));
        p.z_d.emplace_back(zf.block(1, 1, m, m));
    }
    return p;
}

namespace detail {

/// Indices (0-based into the auxiliary block) of the closed ports.
inline std::vector<int> closed_indices(const PortConfiguration& y) {
    std::vector<int> s;
    s.reserve(y.size());
    for (std::size_t k = 0; k < y.size(); ++k)
        if (y.closed[k]) s.push_back(static_cast<int>(k));
    return s;
}

/// Loaded input impedance at one frequency. Open ports are deleted (the
/// infinite-load limit); closed ports enter with zero load, so the reduction
/// is the Schur complement over the shorted-port submatrix.
///
/// A closed-port set containing a mesh of the pixel graph makes that
/// submatrix exactly rank-deficient: the circulating current around the mesh
/// is indeterminate. The system stays consistent and the coupling row
/// annihilates the circulation space, so any solution yields the same input
/// impedance; a rank-revealing solve recovers it. SingularBlock is reserved
/// for blocks where even that fails (inconsistent data, condition beyond
/// 1e14 on the retained rank).
inline Complex reduce_at_frequency(const PartitionedZ& p, std::size_t fi,
                                   const std::vector<int>& shorted) {
    if (shorted.empty()) return p.z_a[fi];
    const int k = static_cast<int>(shorted.size());
    Eigen::MatrixXcd dss(k, k);
    Eigen::VectorXcd css(k);
    Eigen::RowVectorXcd bss(k);
    for (int i = 0; i < k; ++i) {
        css(i) = p.z_c[fi](shorted[static_cast<std::size_t>(i)]);
        bss(i) = p.z_b[fi](shorted[static_cast<std::size_t>(i)]);
        for (int j = 0; j < k; ++j)
            dss(i, j) = p.z_d[fi](shorted[static_cast<std::size_t>(i)],
                                  shorted[static_cast<std::size_t>(j)]);
    }

    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(dss);
    Eigen::VectorXcd x;
    if (lu.rcond() > 1e-10) {
        x = lu.solve(css);
    } else {
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(dss);
        x = cod.solve(css);
        const double scale = dss.norm() * x.norm() + css.norm();
        if ((dss * x - css).norm() > 1e-8 * (scale > 0.0 ? scale : 1.0))
            throw SingularBlock("shorted-port submatrix is singular beyond mesh redundancy");
    }
    return p.z_a[fi] - (bss * x).value();
}

} // namespace detail

/// Input impedance at the external port for every frequency.
inline std::vector<Complex> reduce_input_impedance(const PartitionedZ& p,
                                                   const PortConfiguration& y) {
    if (static_cast<int>(y.size()) != p.m())
        throw LengthMismatch("port configuration length does not match the auxiliary block");
    const std::vector<int> shorted = detail::closed_indices(y);
    std::vector<Complex> z_in;
    z_in.reserve(p.n_freq());
    for (std::size_t fi = 0; fi < p.n_freq(); ++fi)
        z_in.push_back(detail::reduce_at_frequency(p, fi, shorted));
    return z_in;
}

/// R_sy(y): the reflection curve predicted for a port configuration, computed
/// purely from the partitioned matrix. Makes no backend calls.
inline ReflectionCurve evaluate_configuration(const PartitionedZ& p, const PortConfiguration& y,
                                              double z0) {
    std::vector<Complex> z_in = reduce_input_impedance(p, y);
    std::vector<Complex> gamma;
    gamma.reserve(z_in.size());
    for (Complex z : z_in) gamma.push_back(reflection(z, z0));
    return ReflectionCurve::from_gamma(p.sweep, std::move(gamma));
}

} // namespace pixant

#endif // PIXANT_IMPM_HPP
