#ifndef PIXANT_IO_HPP
#define PIXANT_IO_HPP

#include <algorithm>
#include <cctype>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pixant/errors.hpp"
#include "pixant/multiport.hpp"
#include "pixant/response.hpp"
#include "pixant/search.hpp"
#include "pixant/trust_region.hpp"

namespace pixant {

enum class MultiportFormat { touchstone, json };

/// Impedance data plus the reference impedance the file declares.
struct LoadedMultiport {
    MultiportZ z;
    double z0 = 50.0;
};

namespace detail {

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline double parse_double(const std::string& tok) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(tok, &pos);
    } catch (const std::exception&) {
        throw ParseError("expected a number, found '" + tok + "'");
    }
    if (pos != tok.size()) throw ParseError("trailing characters in number '" + tok + "'");
    return v;
}

/// Port count from a .sNp / .zNp extension.
inline std::optional<int> ports_from_filename(const std::string& path) {
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos) return std::nullopt;
    std::string ext = lower(path.substr(dot + 1));
    if (ext.size() < 3 || (ext.front() != 's' && ext.front() != 'z') || ext.back() != 'p')
        return std::nullopt;
    const std::string digits = ext.substr(1, ext.size() - 2);
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(),
                                       [](unsigned char c) { return std::isdigit(c); }))
        return std::nullopt;
    return std::stoi(digits);
}

struct TouchstoneOptions {
    double freq_to_ghz = 1.0;  // GHz default
    char param_type = 's';
    std::string value_format = "ma";
    double z0 = 50.0;
};

inline TouchstoneOptions parse_option_line(const std::string& line) {
    TouchstoneOptions opt;
    std::istringstream ss(line.substr(1));
    std::string tok;
    bool expect_resistance = false;
    while (ss >> tok) {
        const std::string t = lower(tok);
        if (expect_resistance) {
            opt.z0 = parse_double(t);
            expect_resistance = false;
        } else if (t == "hz") {
            opt.freq_to_ghz = 1e-9;
        } else if (t == "khz") {
            opt.freq_to_ghz = 1e-6;
        } else if (t == "mhz") {
            opt.freq_to_ghz = 1e-3;
        } else if (t == "ghz") {
            opt.freq_to_ghz = 1.0;
        } else if (t == "s" || t == "y" || t == "z" || t == "g" || t == "h") {
            opt.param_type = t.front();
        } else if (t == "ri" || t == "ma" || t == "db") {
            opt.value_format = t;
        } else if (t == "r") {
            expect_resistance = true;
        } else if (t.size() > 2 && t.substr(t.size() - 2) == "hz") {
            throw UnitError("unknown frequency unit '" + tok + "'");
        } else {
            throw ParseError("unrecognized option token '" + tok + "'");
        }
    }
    if (expect_resistance) throw ParseError("option line: R token without a resistance value");
    return opt;
}

} // namespace detail

/// Touchstone version-1 subset: Z-parameter data, RI or MA values, Hz..GHz
/// units. The two-port pair order is (1,1) (2,1) (1,2) (2,2) as in the
/// format's special case; larger matrices are row-major. Values are taken as
/// raw ohms.
inline LoadedMultiport parse_touchstone(std::istream& in, std::optional<int> n_ports) {
    std::optional<detail::TouchstoneOptions> opt;
    std::vector<std::string> tokens;

    std::string line;
    while (std::getline(in, line)) {
        if (const auto bang = line.find('!'); bang != std::string::npos) line.erase(bang);
        std::istringstream ss(line);
        std::string first;
        if (!(ss >> first)) continue;
        if (first.front() == '#') {
            if (opt) throw ParseError("multiple option lines");
            opt = detail::parse_option_line(line.substr(line.find('#')));
            continue;
        }
        if (!opt) throw ParseError("data precedes the option line");
        tokens.push_back(first);
        std::string tok;
        while (ss >> tok) tokens.push_back(tok);
    }
    if (!opt) throw ParseError("missing option line");
    if (opt->param_type != 'z')
        throw UnsupportedFormat(std::string("parameter type '") + opt->param_type +
                                "' not supported (only Z)");
    if (opt->value_format == "db") throw UnsupportedFormat("DB value format not supported");
    if (!n_ports) throw ParseError("port count not deducible; pass it explicitly");
    const int n = *n_ports;
    if (n < 1) throw ParseError("port count must be at least 1");

    const std::size_t record = 1 + 2 * static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
    if (tokens.empty() || tokens.size() % record != 0)
        throw ParseError("data token count is not a whole number of frequency records");

    LoadedMultiport out;
    out.z0 = opt->z0;
    std::vector<double> freqs;
    const std::size_t n_rec = tokens.size() / record;
    for (std::size_t rIdx = 0; rIdx < n_rec; ++rIdx) {
        const std::size_t base = rIdx * record;
        freqs.push_back(detail::parse_double(tokens[base]) * opt->freq_to_ghz);
        Eigen::MatrixXcd zf(n, n);
        for (std::size_t pair = 0; pair < static_cast<std::size_t>(n) * n; ++pair) {
            const double a = detail::parse_double(tokens[base + 1 + 2 * pair]);
            const double b = detail::parse_double(tokens[base + 2 + 2 * pair]);
            Complex v;
            if (opt->value_format == "ri")
                v = Complex(a, b);
            else
                v = std::polar(a, b * std::numbers::pi / 180.0);
            int row, col;
            if (n == 2) {  // v1 two-port order: 11, 21, 12, 22
                col = static_cast<int>(pair / 2);
                row = static_cast<int>(pair % 2);
            } else {
                row = static_cast<int>(pair / static_cast<std::size_t>(n));
                col = static_cast<int>(pair % static_cast<std::size_t>(n));
            }
            zf(row, col) = v;
        }
        out.z.matrices.push_back(std::move(zf));
    }
    for (std::size_t i = 1; i < freqs.size(); ++i)
        if (!(freqs[i] > freqs[i - 1])) throw ParseError("frequencies must be strictly ascending");
    if (!(freqs.front() > 0.0)) throw ParseError("frequencies must be positive");
    out.z.sweep = FrequencySweep::from_list(std::move(freqs));
    out.z.validate();
    return out;
}

/// JSON multiport schema:
///   { "z0": number, "freq_ghz": [..], "n_ports": N,
///     "z_re": [per-frequency row-major N*N], "z_im": [same] }
inline LoadedMultiport parse_multiport_json(std::istream& in) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    try {
        LoadedMultiport out;
        out.z0 = j.at("z0").get<double>();
        const int n = j.at("n_ports").get<int>();
        if (n < 1) throw ParseError("n_ports must be at least 1");
        const auto freqs = j.at("freq_ghz").get<std::vector<double>>();
        const auto& re = j.at("z_re");
        const auto& im = j.at("z_im");
        if (re.size() != freqs.size() || im.size() != freqs.size())
            throw ParseError("z_re/z_im length does not match freq_ghz");
        for (std::size_t fi = 0; fi < freqs.size(); ++fi) {
            const auto re_f = re[fi].get<std::vector<double>>();
            const auto im_f = im[fi].get<std::vector<double>>();
            const std::size_t nn = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
            if (re_f.size() != nn || im_f.size() != nn)
                throw ParseError("matrix entry count does not match n_ports");
            Eigen::MatrixXcd zf(n, n);
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < n; ++c) {
                    const std::size_t k = static_cast<std::size_t>(r) * n + c;
                    zf(r, c) = Complex(re_f[k], im_f[k]);
                }
            out.z.matrices.push_back(std::move(zf));
        }
        out.z.sweep = FrequencySweep::from_list(freqs);
        out.z.validate();
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("multiport JSON schema violation: ") + e.what());
    }
}

inline MultiportFormat infer_format(const std::string& path) {
    const auto dot = path.find_last_of('.');
    const std::string ext = dot == std::string::npos ? "" : detail::lower(path.substr(dot + 1));
    if (ext == "json") return MultiportFormat::json;
    if (detail::ports_from_filename(path)) return MultiportFormat::touchstone;
    throw ConfigError("cannot infer multiport format from '" + path + "'; specify it explicitly");
}

inline LoadedMultiport load_multiport_file(const std::string& path,
                                           std::optional<MultiportFormat> format = {},
                                           std::optional<int> n_ports = {}) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open multiport file '" + path + "'");
    const MultiportFormat fmt = format ? *format : infer_format(path);
    if (fmt == MultiportFormat::json) return parse_multiport_json(in);
    if (!n_ports) n_ports = detail::ports_from_filename(path);
    return parse_touchstone(in, n_ports);
}

inline void save_multiport_json(const MultiportZ& z, double z0, const std::string& path) {
    z.validate();
    nlohmann::ordered_json j;
    j["z0"] = z0;
    j["freq_ghz"] = z.sweep.freq_ghz();
    j["n_ports"] = z.n_ports();
    nlohmann::ordered_json re = nlohmann::ordered_json::array();
    nlohmann::ordered_json im = nlohmann::ordered_json::array();
    for (const auto& zf : z.matrices) {
        std::vector<double> re_f, im_f;
        re_f.reserve(static_cast<std::size_t>(zf.size()));
        im_f.reserve(static_cast<std::size_t>(zf.size()));
        for (int r = 0; r < zf.rows(); ++r)
            for (int c = 0; c < zf.cols(); ++c) {
                re_f.push_back(zf(r, c).real());
                im_f.push_back(zf(r, c).imag());
            }
        re.push_back(re_f);
        im.push_back(im_f);
    }
    j["z_re"] = std::move(re);
    j["z_im"] = std::move(im);
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << j.dump(1) << '\n';
}

inline void save_multiport_touchstone(const MultiportZ& z, double z0, const std::string& path) {
    z.validate();
    const int n = z.n_ports();
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << "! " << n << "-port impedance data\n";
    out << "# GHz Z RI R " << detail::fmt_double(z0) << "\n";
    for (std::size_t fi = 0; fi < z.sweep.size(); ++fi) {
        const auto& zf = z.matrices[fi];
        out << detail::fmt_double(z.sweep[fi]);
        auto emit = [&](int r, int c) {
            out << ' ' << detail::fmt_double(zf(r, c).real()) << ' '
                << detail::fmt_double(zf(r, c).imag());
        };
        if (n == 2) {
            emit(0, 0);
            emit(1, 0);
            emit(0, 1);
            emit(1, 1);
            out << '\n';
        } else {
            for (int r = 0; r < n; ++r) {
                for (int c = 0; c < n; ++c) emit(r, c);
                out << '\n';
            }
        }
    }
}

// ---------------------------------------------------------------------------
// CSV artifacts

inline void write_curve_csv(const ReflectionCurve& curve, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << "freq_ghz,re_gamma,im_gamma,mag_db\n";
    for (std::size_t i = 0; i < curve.size(); ++i)
        out << detail::fmt_double(curve.sweep[i]) << ',' << detail::fmt_double(curve.gamma[i].real())
            << ',' << detail::fmt_double(curve.gamma[i].imag()) << ','
            << detail::fmt_double(curve.mag_db[i]) << '\n';
}

inline ReflectionCurve read_curve_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open curve file '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != "freq_ghz,re_gamma,im_gamma,mag_db")
        throw ParseError("curve CSV: unexpected header");
    ReflectionCurve curve;
    std::vector<double> freqs;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string cell;
        std::vector<double> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(detail::parse_double(cell));
        if (cells.size() != 4) throw ParseError("curve CSV: expected 4 columns");
        freqs.push_back(cells[0]);
        curve.gamma.emplace_back(cells[1], cells[2]);
        curve.mag_db.push_back(cells[3]);
    }
    if (freqs.empty()) throw ParseError("curve CSV: no data rows");
    curve.sweep = FrequencySweep::from_list(std::move(freqs));
    return curve;
}

inline void write_search_table_csv(const SearchResult& result, const std::string& path) {
    if (!result.value_table) throw ConfigError("search result carries no value table");
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    const std::size_t m = result.best_config.size();
    out << "config_index,bits,objective\n";
    for (std::size_t i = 0; i < result.value_table->size(); ++i) {
        const auto bits =
            PortConfiguration::from_index(static_cast<std::uint32_t>(i), m).to_bitstring();
        out << i << ',' << bits << ',';
        const double v = (*result.value_table)[i];
        if (std::isinf(v))
            out << "inf";
        else
            out << detail::fmt_double(v);
        out << '\n';
    }
}

inline void write_trace_csv(const OptimizationTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << "iteration,U,rho,delta,accepted,cumulative_evals\n";
    for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
        const IterationRecord& r = trace.iterations[i];
        out << (i + 1) << ',' << detail::fmt_double(r.u) << ',' << detail::fmt_double(r.rho) << ','
            << detail::fmt_double(r.delta) << ',' << (r.accepted ? 1 : 0) << ','
            << r.cumulative_evals << '\n';
    }
}

} // namespace pixant

#endif // PIXANT_IO_HPP
