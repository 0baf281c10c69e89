#ifndef PIXANT_MULTIPORT_HPP
#define PIXANT_MULTIPORT_HPP

#include <Eigen/Dense>
#include <vector>

#include "pixant/errors.hpp"
#include "pixant/sweep.hpp"

namespace pixant {

/// Frequency-swept N-port impedance matrix. Port 1 is the external feed port;
/// ports 2..N are the internal pixel-gap ports in PortMap order.
struct MultiportZ {
    FrequencySweep sweep;
    std::vector<Eigen::MatrixXcd> matrices;  // one N x N matrix per frequency, ohms

    int n_ports() const {
        return matrices.empty() ? 0 : static_cast<int>(matrices.front().rows());
    }

    void validate() const {
        if (matrices.size() != sweep.size())
            throw LengthMismatch("multiport: matrix count does not match sweep length");
        const int n = n_ports();
        if (n < 1) throw ConfigError("multiport: need at least the external port");
        for (const auto& m : matrices)
            if (m.rows() != n || m.cols() != n)
                throw LengthMismatch("multiport: inconsistent matrix dimensions across frequencies");
    }
};

/// Binary state vector for the M internal ports: closed = 0-ohm load
/// (pixels connected), open = infinite load (disconnected).
struct PortConfiguration {
    std::vector<bool> closed;  // closed[m] is port m+1 of the impedance matrix

    std::size_t size() const { return closed.size(); }

    static PortConfiguration all_open(std::size_t m) {
        PortConfiguration y;
        y.closed.assign(m, false);
        return y;
    }

    static PortConfiguration all_closed(std::size_t m) {
        PortConfiguration y;
        y.closed.assign(m, true);
        return y;
    }

    /// Bit k of `index` is the state of port k+1 (1 = closed).
    static PortConfiguration from_index(std::uint32_t index, std::size_t m) {
        if (m > 32) throw TooManyPorts("port configuration index covers at most 32 ports");
        PortConfiguration y;
        y.closed.resize(m);
        for (std::size_t k = 0; k < m; ++k) y.closed[k] = ((index >> k) & 1u) != 0;
        return y;
    }

    std::uint32_t to_index() const {
        if (closed.size() > 32) throw TooManyPorts("port configuration index covers at most 32 ports");
        std::uint32_t idx = 0;
        for (std::size_t k = 0; k < closed.size(); ++k)
            if (closed[k]) idx |= (1u << k);
        return idx;
    }

    /// Character i is port i+1; '1' = closed, '0' = open.
    static PortConfiguration from_bitstring(const std::string& bits) {
        PortConfiguration y;
        y.closed.reserve(bits.size());
        for (char c : bits) {
            if (c == '0')
                y.closed.push_back(false);
            else if (c == '1')
                y.closed.push_back(true);
            else
                throw ConfigError("port bitstring may contain only '0' and '1'");
        }
        return y;
    }

    std::string to_bitstring() const {
        std::string s;
        s.reserve(closed.size());
        for (bool b : closed) s.push_back(b ? '1' : '0');
        return s;
    }

    friend bool operator==(const PortConfiguration&, const PortConfiguration&) = default;
};

} // namespace pixant

#endif // PIXANT_MULTIPORT_HPP
