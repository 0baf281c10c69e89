#ifndef PIXANT_CIRCUIT_HPP
#define PIXANT_CIRCUIT_HPP

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <vector>

#include "pixant/errors.hpp"
#include "pixant/geometry.hpp"
#include "pixant/ledger.hpp"
#include "pixant/multiport.hpp"
#include "pixant/response.hpp"
#include "pixant/sweep.hpp"

namespace pixant {

/// Lumped-circuit stand-in for the full-wave radiator model. Each pixel is a
/// series-RLC shunt branch to ground, each inter-pixel gap a fixed capacitor
/// in parallel with its controllable port, and the feed node hangs off the
/// bottom-row center pixel through a series RL branch with a shunt capacitor.
struct CircuitModel {
    GridShape shape;
    int feed_pixel = 0;    ///< 0-based node index of the pixel the feed attaches to

    double r_pix_ohm = 0.0;
    double l_pix_nh = 0.0;
    double c_pix_pf = 0.0;
    double c_gap_pf = 0.0;
    double r_feed_ohm = 0.0;
    double l_feed_nh = 0.0;
    double c_feed_pf = 0.0;

    int pixel_count() const { return shape.pixel_count(); }
    int feed_node() const { return shape.pixel_count(); }
    int node_count() const { return shape.pixel_count() + 1; }

    void validate() const {
        if (r_pix_ohm < 0.0 || r_feed_ohm < 0.0)
            throw ConfigError("circuit: resistances must be non-negative");
        if (!(l_pix_nh > 0.0) || !(l_feed_nh > 0.0))
            throw ConfigError("circuit: inductances must be positive");
        if (!(c_pix_pf > 0.0) || !(c_gap_pf > 0.0) || !(c_feed_pf > 0.0))
            throw ConfigError("circuit: capacitances must be positive");
    }
};

/// Fixed element parameterization mapping the design vector onto the lumped
/// network. The constants put the 3x3 pixel-branch self-resonance near 6 GHz
/// at the stock initial design, inside the standard sweep.
inline CircuitModel build_circuit(const GeometryParams& x, const GridShape& shape,
                                  double substrate_h_mm) {
    if (!(substrate_h_mm > 0.0)) throw ConfigError("substrate height must be positive");
    const DerivedDims dims = derive_dimensions(x, shape);

    CircuitModel c;
    c.shape = shape;
    const int feed_col = (shape.n_cols + 1) / 2;  // center column, ties to the left
    c.feed_pixel = pixel_node(shape, {shape.n_rows, feed_col});
    c.c_pix_pf = 0.05 * x.l * x.l / substrate_h_mm;
    c.l_pix_nh = 0.8 * x.l;
    c.r_pix_ohm = 0.5;
    c.c_gap_pf = 0.02 * x.l / x.d;
    c.l_feed_nh = 0.6 * dims.l_m;
    c.r_feed_ohm = 0.2;
    c.c_feed_pf = 0.01 * dims.l_g;
    c.validate();
    return c;
}

namespace detail {

inline Complex series_rlc_admittance(double r_ohm, double l_nh, double c_pf, double omega) {
    const Complex z(r_ohm, omega * l_nh * 1e-9 - 1.0 / (omega * c_pf * 1e-12));
    return 1.0 / z;
}

inline Complex series_rl_admittance(double r_ohm, double l_nh, double omega) {
    return 1.0 / Complex(r_ohm, omega * l_nh * 1e-9);
}

inline Complex cap_admittance(double c_pf, double omega) {
    return Complex(0.0, omega * c_pf * 1e-12);
}

/// Stamps a two-terminal admittance between nodes a and b; either may be -1
/// for ground. Coincident nodes (merged shorts) cancel out naturally.
inline void stamp(Eigen::MatrixXcd& y, int a, int b, Complex adm) {
    if (a >= 0) y(a, a) += adm;
    if (b >= 0) y(b, b) += adm;
    if (a >= 0 && b >= 0) {
        y(a, b) -= adm;
        y(b, a) -= adm;
    }
}

/// Node admittance matrix at angular frequency omega, with pixel/feed nodes
/// remapped through `node_of` (identity for the unreduced network).
inline Eigen::MatrixXcd assemble_admittance(const CircuitModel& c, const PortMap& ports,
                                            const std::vector<int>& node_of, int n_reduced,
                                            double omega) {
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n_reduced, n_reduced);
    const Complex y_pix =
        series_rlc_admittance(c.r_pix_ohm, c.l_pix_nh, c.c_pix_pf, omega);
    for (int p = 0; p < c.pixel_count(); ++p) stamp(y, node_of[static_cast<std::size_t>(p)], -1, y_pix);

    const Complex y_gap = cap_admittance(c.c_gap_pf, omega);
    for (const InternalPort& port : ports) {
        const int a = node_of[static_cast<std::size_t>(pixel_node(c.shape, port.a))];
        const int b = node_of[static_cast<std::size_t>(pixel_node(c.shape, port.b))];
        stamp(y, a, b, y_gap);
    }

    const int feed = node_of[static_cast<std::size_t>(c.feed_node())];
    const int attach = node_of[static_cast<std::size_t>(c.feed_pixel)];
    stamp(y, feed, attach, series_rl_admittance(c.r_feed_ohm, c.l_feed_nh, omega));
    stamp(y, feed, -1, cap_admittance(c.c_feed_pf, omega));
    return y;
}

inline std::vector<int> identity_nodes(int n) {
    std::vector<int> ids(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) ids[static_cast<std::size_t>(i)] = i;
    return ids;
}

/// Collapses the node set by merging each closed port's pixel pair; returns
/// the node->representative map and the reduced node count.
inline std::pair<std::vector<int>, int> merge_closed_ports(const CircuitModel& c,
                                                           const PortMap& ports,
                                                           const PortConfiguration& y) {
    const int n = c.node_count();
    std::vector<int> parent = identity_nodes(n);
    auto find = [&](int v) {
        while (parent[static_cast<std::size_t>(v)] != v) {
            parent[static_cast<std::size_t>(v)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
            v = parent[static_cast<std::size_t>(v)];
        }
        return v;
    };
    for (std::size_t m = 0; m < ports.size(); ++m) {
        if (!y.closed[m]) continue;
        const int a = find(pixel_node(c.shape, ports[m].a));
        const int b = find(pixel_node(c.shape, ports[m].b));
        if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    }
    std::vector<int> node_of(static_cast<std::size_t>(n), -1);
    int next = 0;
    for (int v = 0; v < n; ++v) {
        const int root = find(v);
        if (node_of[static_cast<std::size_t>(root)] < 0) node_of[static_cast<std::size_t>(root)] = next++;
        node_of[static_cast<std::size_t>(v)] = node_of[static_cast<std::size_t>(root)];
    }
    return {node_of, next};
}

inline constexpr double kGhzToRad = 2.0 * std::numbers::pi * 1e9;

} // namespace detail

/// Extracts the N-port impedance matrix (N = M + 1) by nodal analysis with
/// all internal ports open: column k comes from a unit current injected into
/// port k's node pair, rows read every port's terminal-pair voltage.
inline MultiportZ extract_multiport(const CircuitModel& circuit, const PortMap& ports,
                                    const FrequencySweep& sweep, CostLedger* ledger = nullptr) {
    circuit.validate();
    const int n_nodes = circuit.node_count();
    const int n_ports_total = static_cast<int>(ports.size()) + 1;
    const std::vector<int> ident = detail::identity_nodes(n_nodes);

    MultiportZ z;
    z.sweep = sweep;
    z.matrices.reserve(sweep.size());
    for (double f : sweep.freq_ghz()) {
        const double omega = detail::kGhzToRad * f;
        const Eigen::MatrixXcd y =
            detail::assemble_admittance(circuit, ports, ident, n_nodes, omega);
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(y);
        if (lu.rcond() < 1e-14)
            throw SingularSystem("node admittance matrix is numerically singular");

        Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(n_nodes, n_ports_total);
        rhs(circuit.feed_node(), 0) = 1.0;  // port 1: feed node against ground
        for (std::size_t m = 0; m < ports.size(); ++m) {
            rhs(pixel_node(circuit.shape, ports[m].a), static_cast<int>(m) + 1) += 1.0;
            rhs(pixel_node(circuit.shape, ports[m].b), static_cast<int>(m) + 1) -= 1.0;
        }
        const Eigen::MatrixXcd v = lu.solve(rhs);

        Eigen::MatrixXcd zf(n_ports_total, n_ports_total);
        for (int k = 0; k < n_ports_total; ++k) {
            zf(0, k) = v(circuit.feed_node(), k);
            for (std::size_t m = 0; m < ports.size(); ++m)
                zf(static_cast<int>(m) + 1, k) = v(pixel_node(circuit.shape, ports[m].a), k) -
                                                 v(pixel_node(circuit.shape, ports[m].b), k);
        }
        z.matrices.push_back(std::move(zf));
    }
    if (ledger) ledger->multiport_extractions.fetch_add(1);
    return z;
}

/// Brute-force reference: realizes closed ports as exact node merges, open
/// ports as plain absences, and solves the reduced network directly at the
/// feed. Independent of the partition/reduction path.
inline ReflectionCurve oracle_input_reflection(const CircuitModel& circuit, const PortMap& ports,
                                               const PortConfiguration& y,
                                               const FrequencySweep& sweep, double z0,
                                               CostLedger* ledger = nullptr) {
    circuit.validate();
    if (y.size() != ports.size())
        throw LengthMismatch("port configuration length does not match the port map");

    const auto [node_of, n_reduced] = detail::merge_closed_ports(circuit, ports, y);
    const int feed = node_of[static_cast<std::size_t>(circuit.feed_node())];

    std::vector<Complex> gamma;
    gamma.reserve(sweep.size());
    for (double f : sweep.freq_ghz()) {
        const double omega = detail::kGhzToRad * f;
        const Eigen::MatrixXcd yred =
            detail::assemble_admittance(circuit, ports, node_of, n_reduced, omega);
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(yred);
        if (lu.rcond() < 1e-14)
            throw SingularSystem("reduced admittance matrix is numerically singular");
        Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n_reduced);
        rhs(feed) = 1.0;
        const Eigen::VectorXcd v = lu.solve(rhs);
        gamma.push_back(reflection(v(feed), z0));
    }
    if (ledger) ledger->single_response_evaluations.fetch_add(1);
    return ReflectionCurve::from_gamma(sweep, std::move(gamma));
}

} // namespace pixant

#endif // PIXANT_CIRCUIT_HPP
