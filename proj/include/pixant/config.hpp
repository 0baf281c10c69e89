#ifndef PIXANT_CONFIG_HPP
#define PIXANT_CONFIG_HPP

#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pixant/pipeline.hpp"

#ifndef PIXANT_VERSION
#define PIXANT_VERSION "dev"
#endif

namespace pixant {

namespace detail {

/// Unknown keys in a config are a hard error: a silent typo in an
/// optimization config wastes a whole run.
inline void require_known_keys(const nlohmann::json& obj, const std::string& ctx,
                               std::initializer_list<const char*> allowed) {
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) {
                ok = true;
                break;
            }
        if (!ok) throw ConfigError("unknown key '" + key + "' in " + ctx);
    }
}

template <typename T>
T get_or(const nlohmann::json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    return obj.at(key).get<T>();
}

inline GeometryParams params_from_json(const nlohmann::json& arr, const std::string& ctx) {
    const auto v = arr.get<std::vector<double>>();
    if (v.size() != 4)
        throw ConfigError(ctx + " must be a 4-element array [l, d, alpha, gamma]");
    return GeometryParams::from_array({v[0], v[1], v[2], v[3]});
}

inline ObjectiveSpec objective_from_json(const nlohmann::json& obj, const std::string& ctx) {
    if (!obj.is_object() || !obj.contains("variant"))
        throw ConfigError(ctx + " must be an object with a 'variant' key");
    const std::string variant = obj.at("variant").get<std::string>();
    if (variant == "broadband") {
        require_known_keys(obj, ctx, {"variant", "f_low_ghz", "f_high_ghz", "threshold_db"});
        BroadbandObjective spec;
        spec.f_low_ghz = get_or(obj, "f_low_ghz", spec.f_low_ghz);
        spec.f_high_ghz = get_or(obj, "f_high_ghz", spec.f_high_ghz);
        spec.threshold_db = get_or(obj, "threshold_db", spec.threshold_db);
        return spec;
    }
    if (variant == "dualband_scaled") {
        require_known_keys(obj, ctx, {"variant", "threshold_db", "k"});
        DualBandObjective spec;
        spec.threshold_db = get_or(obj, "threshold_db", spec.threshold_db);
        spec.k = get_or(obj, "k", spec.k);
        return spec;
    }
    if (variant == "feature_target") {
        require_known_keys(obj, ctx, {"variant", "targets_ghz", "threshold_db", "beta1"});
        FeatureObjective spec;
        spec.targets_ghz = get_or(obj, "targets_ghz", spec.targets_ghz);
        spec.threshold_db = get_or(obj, "threshold_db", spec.threshold_db);
        spec.beta1 = get_or(obj, "beta1", spec.beta1);
        return spec;
    }
    throw ConfigError(ctx + ": unknown objective variant '" + variant + "'");
}

} // namespace detail

struct LoadedConfig {
    PipelineConfig config;
    nlohmann::json echo;  // the raw document, echoed into reports
};

inline LoadedConfig parse_pipeline_config(const nlohmann::json& j) {
    using detail::get_or;
    using detail::require_known_keys;
    try {
        require_known_keys(j, "config",
                           {"grid", "x0", "bounds", "sweep", "substrate", "backend", "stage1",
                            "stage2", "feature_mode", "trust_region", "z0",
                            "extraction_cost_weight"});
        PipelineConfig c;
        if (j.contains("grid")) {
            const auto& g = j.at("grid");
            require_known_keys(g, "grid", {"n_rows", "n_cols"});
            c.grid.n_rows = get_or(g, "n_rows", c.grid.n_rows);
            c.grid.n_cols = get_or(g, "n_cols", c.grid.n_cols);
        }
        if (j.contains("x0")) c.x0 = detail::params_from_json(j.at("x0"), "x0");
        if (j.contains("bounds")) {
            const auto& b = j.at("bounds");
            require_known_keys(b, "bounds", {"lower", "upper"});
            if (b.contains("lower"))
                c.bounds.lower = detail::params_from_json(b.at("lower"), "bounds.lower");
            if (b.contains("upper"))
                c.bounds.upper = detail::params_from_json(b.at("upper"), "bounds.upper");
        }
        if (j.contains("sweep")) {
            const auto& s = j.at("sweep");
            require_known_keys(s, "sweep", {"f_start_ghz", "f_stop_ghz", "n_points"});
            c.sweep = FrequencySweep::uniform(get_or(s, "f_start_ghz", 1.0),
                                              get_or(s, "f_stop_ghz", 11.0),
                                              get_or(s, "n_points", 201));
        }
        if (j.contains("substrate")) {
            const auto& s = j.at("substrate");
            require_known_keys(s, "substrate", {"h_mm", "er", "tan_d"});
            c.substrate.h_mm = get_or(s, "h_mm", c.substrate.h_mm);
            c.substrate.er = get_or(s, "er", c.substrate.er);
            c.substrate.tan_d = get_or(s, "tan_d", c.substrate.tan_d);
        }
        if (j.contains("backend")) {
            const auto& b = j.at("backend");
            require_known_keys(b, "backend", {"type", "path", "format", "n_ports"});
            const std::string type = get_or<std::string>(b, "type", "synthetic");
            if (type == "synthetic") {
                c.backend.type = BackendSpec::Type::synthetic;
            } else if (type == "file") {
                c.backend.type = BackendSpec::Type::file;
                c.backend.path = get_or<std::string>(b, "path", "");
                if (b.contains("format")) {
                    const std::string f = b.at("format").get<std::string>();
                    if (f == "touchstone")
                        c.backend.format = MultiportFormat::touchstone;
                    else if (f == "json")
                        c.backend.format = MultiportFormat::json;
                    else
                        throw ConfigError("backend.format must be 'touchstone' or 'json'");
                }
                if (b.contains("n_ports")) c.backend.n_ports = b.at("n_ports").get<int>();
            } else {
                throw ConfigError("backend.type must be 'synthetic' or 'file'");
            }
        }
        if (j.contains("stage1")) c.stage1 = detail::objective_from_json(j.at("stage1"), "stage1");
        if (j.contains("stage2")) c.stage2 = detail::objective_from_json(j.at("stage2"), "stage2");
        c.feature_mode = get_or(j, "feature_mode", false);
        if (j.contains("trust_region")) {
            const auto& t = j.at("trust_region");
            require_known_keys(t, "trust_region",
                               {"delta0", "expand", "shrink", "rho_hi", "rho_lo", "epsilon",
                                "fd_step", "max_iterations"});
            c.tr.delta0 = get_or(t, "delta0", c.tr.delta0);
            c.tr.expand = get_or(t, "expand", c.tr.expand);
            c.tr.shrink = get_or(t, "shrink", c.tr.shrink);
            c.tr.rho_hi = get_or(t, "rho_hi", c.tr.rho_hi);
            c.tr.rho_lo = get_or(t, "rho_lo", c.tr.rho_lo);
            c.tr.epsilon = get_or(t, "epsilon", c.tr.epsilon);
            c.tr.fd_step = get_or(t, "fd_step", c.tr.fd_step);
            c.tr.max_iterations = get_or(t, "max_iterations", c.tr.max_iterations);
        }
        c.z0 = get_or(j, "z0", c.z0);
        c.extraction_cost_weight = get_or(j, "extraction_cost_weight", c.extraction_cost_weight);
        c.validate();
        return {std::move(c), j};
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

inline LoadedConfig load_pipeline_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_pipeline_config(j);
}

// ---------------------------------------------------------------------------
// Report serialization

namespace detail {

inline nlohmann::ordered_json curve_to_json(const ReflectionCurve& curve) {
    nlohmann::ordered_json j;
    j["freq_ghz"] = curve.sweep.freq_ghz();
    std::vector<double> re, im;
    re.reserve(curve.size());
    im.reserve(curve.size());
    for (const Complex& g : curve.gamma) {
        re.push_back(g.real());
        im.push_back(g.imag());
    }
    j["re_gamma"] = std::move(re);
    j["im_gamma"] = std::move(im);
    j["mag_db"] = curve.mag_db;
    return j;
}

inline nlohmann::ordered_json params_to_json(const GeometryParams& x) {
    nlohmann::ordered_json j;
    j["l"] = x.l;
    j["d"] = x.d;
    j["alpha"] = x.alpha;
    j["gamma"] = x.gamma;
    return j;
}

} // namespace detail

/// Single-document report: design outcome, cost ledger and the three
/// reference curves, plus the config echo. Deterministic for identical
/// inputs (no timestamps, no machine identifiers).
inline nlohmann::ordered_json report_to_json(const DesignReport& report,
                                             const nlohmann::json& config_echo) {
    nlohmann::ordered_json j;
    j["artifact"] = {{"name", "pixant"}, {"version", PIXANT_VERSION}};
    j["config"] = config_echo;

    nlohmann::ordered_json y;
    y["bits"] = report.y_star.to_bitstring();
    y["index"] = report.y_star_index;
    std::vector<int> closed;
    for (std::size_t k = 0; k < report.y_star.size(); ++k)
        if (report.y_star.closed[k]) closed.push_back(static_cast<int>(k) + 1);
    y["closed_ports"] = closed;
    j["y_star"] = std::move(y);
    j["x_star"] = detail::params_to_json(report.x_star);

    j["stage1"] = {{"best_value", report.stage1_best_value},
                   {"evaluated_count", report.stage1_evaluated},
                   {"best_index", report.y_star_index}};

    nlohmann::ordered_json s2;
    s2["initial_u"] = report.stage2_trace.initial_u;
    s2["final_u"] = report.stage2_trace.final_u;
    s2["accepted"] = report.stage2_trace.accepted_count;
    s2["rejected"] = report.stage2_trace.rejected_count;
    s2["jacobian_builds"] = report.stage2_trace.jacobian_builds;
    s2["total_evaluator_calls"] = report.stage2_trace.total_evaluator_calls;
    s2["termination"] = to_string(report.stage2_trace.termination);
    nlohmann::ordered_json iters = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < report.stage2_trace.iterations.size(); ++i) {
        const IterationRecord& r = report.stage2_trace.iterations[i];
        nlohmann::ordered_json row;
        row["iteration"] = i + 1;
        row["x"] = std::vector<double>(r.x.data(), r.x.data() + r.x.size());
        row["u"] = r.u;
        row["u_model"] = r.u_model;
        row["rho"] = r.rho;
        row["delta"] = r.delta;
        row["accepted"] = r.accepted;
        row["cumulative_evals"] = r.cumulative_evals;
        iters.push_back(std::move(row));
    }
    s2["iterations"] = std::move(iters);
    j["stage2"] = std::move(s2);

    nlohmann::ordered_json cost;
    cost["multiport_extractions"] = report.ledger.multiport_extractions.load();
    cost["single_response_evaluations"] = report.ledger.single_response_evaluations.load();
    cost["extraction_cost_weight"] = report.ledger.weight;
    cost["total"] = report.ledger.total();
    cost["stage1"] = {{"multiport_extractions", report.stage1_counts.multiport_extractions},
                      {"single_response_evaluations",
                       report.stage1_counts.single_response_evaluations}};
    cost["stage2"] = {{"multiport_extractions", report.stage2_counts.multiport_extractions},
                      {"single_response_evaluations",
                       report.stage2_counts.single_response_evaluations}};
    j["cost"] = std::move(cost);

    nlohmann::ordered_json results;
    nlohmann::ordered_json bands = nlohmann::ordered_json::array();
    for (const auto& [lo, hi] : report.bands_ghz) bands.push_back({lo, hi});
    results["bands_below_minus10_db_ghz"] = std::move(bands);
    results["resonances_ghz"] = report.resonances_ghz;
    j["results"] = std::move(results);

    j["curves"] = {{"impm_stage1", detail::curve_to_json(report.impm_curve)},
                   {"initial", detail::curve_to_json(report.initial_curve)},
                   {"final", detail::curve_to_json(report.final_curve)}};
    return j;
}

} // namespace pixant

#endif // PIXANT_CONFIG_HPP
