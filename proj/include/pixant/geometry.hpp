#ifndef PIXANT_GEOMETRY_HPP
#define PIXANT_GEOMETRY_HPP

#include <array>
#include <string>
#include <vector>

#include "pixant/errors.hpp"

namespace pixant {

/// Rectangular pixel lattice: n_rows x n_cols metallic patches.
struct GridShape {
    int n_rows = 1;
    int n_cols = 1;

    void validate() const {
        if (n_rows < 1 || n_cols < 1)
            throw ConfigError("grid shape must have n_rows >= 1 and n_cols >= 1");
    }

    int pixel_count() const { return n_rows * n_cols; }
};

/// Number of unique internal (auxiliary) ports between adjacent pixels.
inline int port_count(const GridShape& shape) {
    shape.validate();
    return 2 * shape.n_rows * shape.n_cols - (shape.n_rows + shape.n_cols);
}

/// 1-based pixel coordinate on the lattice.
struct PixelRef {
    int row = 1;
    int col = 1;

    friend bool operator==(const PixelRef&, const PixelRef&) = default;
};

/// An internal port bridging two grid-adjacent pixels.
struct InternalPort {
    PixelRef a;
    PixelRef b;

    friend bool operator==(const InternalPort&, const InternalPort&) = default;
};

/// Canonical list of the M internal ports. Port m (1-based) corresponds to
/// matrix row/column m+1 of the multiport impedance matrix.
using PortMap = std::vector<InternalPort>;

/// Canonical port ordering: all horizontal gaps in row-major order, then all
/// vertical gaps in row-major order. Deterministic by construction.
inline PortMap enumerate_ports(const GridShape& shape) {
    shape.validate();
    PortMap ports;
    ports.reserve(static_cast<std::size_t>(port_count(shape)));
    for (int r = 1; r <= shape.n_rows; ++r)
        for (int c = 1; c < shape.n_cols; ++c)
            ports.push_back({{r, c}, {r, c + 1}});
    for (int r = 1; r < shape.n_rows; ++r)
        for (int c = 1; c <= shape.n_cols; ++c)
            ports.push_back({{r, c}, {r + 1, c}});
    return ports;
}

/// 0-based node index of a pixel in row-major order.
inline int pixel_node(const GridShape& shape, const PixelRef& p) {
    return (p.row - 1) * shape.n_cols + (p.col - 1);
}

/// Floating-point design vector x = [l d alpha gamma], all in mm.
struct GeometryParams {
    double l = 3.0;      ///< pixel edge length
    double d = 0.2;      ///< inter-pixel gap
    double alpha = 0.0;  ///< ground-length offset
    double gamma = 3.0;  ///< feed-length parameter

    std::array<double, 4> to_array() const { return {l, d, alpha, gamma}; }

    static GeometryParams from_array(const std::array<double, 4>& v) {
        return {v[0], v[1], v[2], v[3]};
    }

    static const char* component_name(int k) {
        static const char* names[4] = {"l", "d", "alpha", "gamma"};
        return names[k];
    }
};

/// Box bounds on the design vector.
struct ParameterBounds {
    GeometryParams lower;
    GeometryParams upper;

    void validate() const {
        auto lo = lower.to_array();
        auto hi = upper.to_array();
        for (int k = 0; k < 4; ++k)
            if (!(lo[k] < hi[k]))
                throw ConfigError(std::string("bounds: lower must be strictly below upper for ") +
                                  GeometryParams::component_name(k));
    }

    /// Index of the first out-of-bounds component, or -1 if x is inside.
    int first_violation(const GeometryParams& x) const {
        auto v = x.to_array();
        auto lo = lower.to_array();
        auto hi = upper.to_array();
        for (int k = 0; k < 4; ++k)
            if (v[k] < lo[k] || v[k] > hi[k]) return k;
        return -1;
    }

    bool contains(const GeometryParams& x) const { return first_violation(x) < 0; }
};

/// Stock design-space box for the 3x3 monopole lattice.
inline ParameterBounds default_bounds() {
    return {{3.0, 0.2, 0.0, 2.4}, {5.0, 0.6, 4.0, 5.0}};
}

/// Dimensions derived from the design vector: substrate side, feed length,
/// ground length, feed width. w_m, beta and o are fixed layout constants.
struct DerivedDims {
    double l_s = 0.0;  ///< substrate side, mm
    double l_m = 0.0;  ///< feed length, mm
    double l_g = 0.0;  ///< ground length, mm
    double w_g = 0.0;  ///< feed width, mm

    static constexpr double w_m = 3.0;
    static constexpr double beta = 0.4;
    static constexpr double o = 3.0;
};

/// Computes the derived dimensions. The feed pair (l_m, w_g) is defined by
/// l_m = w_g + gamma together with w_g = beta*l_m; the unique solution is
/// l_m = gamma / (1 - beta).
inline DerivedDims derive_dimensions(const GeometryParams& x, const GridShape& shape) {
    shape.validate();
    DerivedDims dims;
    dims.l_s = x.l * shape.n_cols + x.d * (shape.n_cols - 1) + 2.0 * DerivedDims::o;
    dims.l_m = x.gamma / (1.0 - DerivedDims::beta);
    dims.w_g = DerivedDims::beta * dims.l_m;
    dims.l_g = dims.l_s - x.alpha;
    if (!(dims.l_g > 0.0))
        throw NonPositiveGround("ground length l_s - alpha is not positive (alpha too large for this lattice)");
    return dims;
}

} // namespace pixant

#endif // PIXANT_GEOMETRY_HPP
