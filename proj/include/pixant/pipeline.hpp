#ifndef PIXANT_PIPELINE_HPP
#define PIXANT_PIPELINE_HPP

#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "pixant/circuit.hpp"
#include "pixant/errors.hpp"
#include "pixant/geometry.hpp"
#include "pixant/impm.hpp"
#include "pixant/io.hpp"
#include "pixant/ledger.hpp"
#include "pixant/objectives.hpp"
#include "pixant/search.hpp"
#include "pixant/trust_region.hpp"

namespace pixant {

struct SubstrateSpec {
    double h_mm = 1.6;
    /// Relative permittivity and loss tangent are recorded for provenance;
    /// only the height enters the synthetic circuit.
    double er = 4.3;
    double tan_d = 0.025;

    void validate() const {
        if (!(h_mm > 0.0)) throw ConfigError("substrate: h_mm must be positive");
    }
};

struct BackendSpec {
    enum class Type { synthetic, file };
    Type type = Type::synthetic;
    std::string path;                       // file backend only
    std::optional<MultiportFormat> format;  // inferred from the extension when absent
    std::optional<int> n_ports;             // Touchstone port-count override

    void validate() const {
        if (type == Type::file && path.empty())
            throw ConfigError("backend: file backend requires a path");
    }
};

struct PipelineConfig {
    GridShape grid{3, 3};
    GeometryParams x0{3.0, 0.2, 0.0, 3.0};
    ParameterBounds bounds = default_bounds();
    FrequencySweep sweep = FrequencySweep::standard();
    SubstrateSpec substrate;
    BackendSpec backend;
    ObjectiveSpec stage1 = BroadbandObjective{};
    ObjectiveSpec stage2 = BroadbandObjective{};
    bool feature_mode = false;
    TrustRegionConfig tr;
    double z0 = 50.0;
    double extraction_cost_weight = 2.3;

    void validate() const {
        grid.validate();
        bounds.validate();
        substrate.validate();
        backend.validate();
        tr.validate();
        pixant::validate(stage1);
        pixant::validate(stage2);
        if (!(z0 > 0.0)) throw ConfigError("z0 must be positive");
        if (!(extraction_cost_weight > 0.0))
            throw ConfigError("extraction_cost_weight must be positive");
        if (const int k = bounds.first_violation(x0); k >= 0)
            throw ConfigError(std::string("x0 component ") + GeometryParams::component_name(k) +
                              " lies outside its bounds");
        if (feature_mode && !std::holds_alternative<FeatureObjective>(stage2))
            throw ConfigError("feature_mode requires a feature_target stage-2 objective");
        if (std::holds_alternative<FeatureObjective>(stage2) && !feature_mode)
            throw ConfigError("a feature_target stage-2 objective requires feature_mode");
    }
};

/// Per-stage slice of the ledger counters.
struct StageCounts {
    std::uint64_t multiport_extractions = 0;
    std::uint64_t single_response_evaluations = 0;
};

struct Stage1Result {
    PartitionedZ partitioned;
    SearchResult search;
    ReflectionCurve best_impm_curve;
    double file_z0 = 50.0;  // reference impedance declared by a file backend
};

struct Stage2Result {
    GeometryParams x_star;
    OptimizationTrace trace;
    ReflectionCurve initial_curve;  // backend response at (x0, y*)
    ReflectionCurve final_curve;    // fresh backend response at (x*, y*)
};

struct DesignReport {
    PortConfiguration y_star;
    std::uint32_t y_star_index = 0;
    GeometryParams x_star;
    double stage1_best_value = 0.0;
    std::uint64_t stage1_evaluated = 0;
    std::optional<std::vector<double>> stage1_table;
    OptimizationTrace stage2_trace;
    ReflectionCurve impm_curve;     // IMPM prediction at (x0, y*)
    ReflectionCurve initial_curve;  // backend at (x0, y*)
    ReflectionCurve final_curve;    // backend at (x*, y*)
    CostLedger ledger;
    StageCounts stage1_counts;
    StageCounts stage2_counts;
    std::vector<std::pair<double, double>> bands_ghz;  // -10 dB compliant bands
    std::vector<double> resonances_ghz;                // refined local minima of the final curve
};

namespace detail {

inline Vector params_to_vector(const GeometryParams& x) {
    Vector v(4);
    const auto a = x.to_array();
    for (int k = 0; k < 4; ++k) v(k) = a[static_cast<std::size_t>(k)];
    return v;
}

inline GeometryParams vector_to_params(const Vector& v) {
    return {v(0), v(1), v(2), v(3)};
}

inline BoxBounds to_box(const ParameterBounds& b) {
    BoxBounds box;
    box.lower = params_to_vector(b.lower);
    box.upper = params_to_vector(b.upper);
    return box;
}

/// Intervals where the curve sits at or below the level, with the edges
/// placed by linear interpolation of the crossings.
inline std::vector<std::pair<double, double>> bands_below(const ReflectionCurve& curve,
                                                          double level_db) {
    std::vector<std::pair<double, double>> bands;
    const auto& f = curve.sweep.freq_ghz();
    const auto& y = curve.mag_db;
    bool inside = y.front() <= level_db;
    double start = f.front();
    for (std::size_t i = 1; i < y.size(); ++i) {
        const bool now = y[i] <= level_db;
        if (now == inside) continue;
        const double t = (level_db - y[i - 1]) / (y[i] - y[i - 1]);
        const double fx = f[i - 1] + t * (f[i] - f[i - 1]);
        if (now)
            start = fx;
        else
            bands.emplace_back(start, fx);
        inside = now;
    }
    if (inside) bands.emplace_back(start, f.back());
    return bands;
}

/// Every refined interior local minimum of the curve.
inline std::vector<double> all_resonances(const ReflectionCurve& curve) {
    const auto& f = curve.sweep.freq_ghz();
    const auto& y = curve.mag_db;
    std::vector<double> res;
    for (std::size_t i : local_minima_indices(y))
        res.push_back(parabolic_vertex(f[i - 1], y[i - 1], f[i], y[i], f[i + 1], y[i + 1]).first);
    return res;
}

} // namespace detail

/// Steps 1-3: lattice, port map, one multiport extraction at x0, partition,
/// exhaustive stage-1 search. The only backend contact is the single
/// extraction (a file load stands in for it on the file backend).
inline Stage1Result run_stage1(const PipelineConfig& config, CostLedger& ledger,
                               bool keep_table = true, int threads = 0) {
    config.validate();
    const PortMap ports = enumerate_ports(config.grid);
    const int m = port_count(config.grid);

    Stage1Result out;
    if (config.backend.type == BackendSpec::Type::synthetic) {
        const CircuitModel circuit = build_circuit(config.x0, config.grid, config.substrate.h_mm);
        out.partitioned = partition(extract_multiport(circuit, ports, config.sweep, &ledger));
    } else {
        LoadedMultiport loaded =
            load_multiport_file(config.backend.path, config.backend.format, config.backend.n_ports);
        if (loaded.z.n_ports() != m + 1)
            throw ConfigError("multiport file has " + std::to_string(loaded.z.n_ports()) +
                              " ports; the " + std::to_string(config.grid.n_rows) + "x" +
                              std::to_string(config.grid.n_cols) + " grid needs " +
                              std::to_string(m + 1));
        out.file_z0 = loaded.z0;
        ledger.multiport_extractions.fetch_add(1);
        out.partitioned = partition(loaded.z);
    }

    const ObjectiveSpec stage1 = config.stage1;
    CurveObjective objective;
    if (config.feature_mode) {
        // Feature-based tuning needs Q extractable resonances from the very
        // first backend response; a topology that cannot supply them is
        // infeasible for this pipeline and scores +inf like any other
        // failing configuration.
        const int q = static_cast<int>(std::get<FeatureObjective>(config.stage2).targets_ghz.size());
        objective = [stage1, q](const ReflectionCurve& curve) {
            const double u = evaluate_curve_objective(curve, stage1);
            extract_features(curve, q);
            return u;
        };
    } else {
        objective = [stage1](const ReflectionCurve& curve) {
            return evaluate_curve_objective(curve, stage1);
        };
    }
    SearchOptions opts;
    opts.keep_table = keep_table;
    opts.threads = threads;
    out.search = exhaustive_search(out.partitioned, objective, m, config.z0, opts);
    if (std::isinf(out.search.best_value))
        throw NoFeasibleTopology("every port configuration failed the stage-1 objective");
    out.best_impm_curve = evaluate_configuration(out.partitioned, out.search.best_config, config.z0);
    return out;
}

/// Steps 4-6: trust-region tuning of the geometry with the topology frozen.
/// Every evaluator call is one direct merged-node solve of the synthetic
/// circuit at the candidate geometry.
inline Stage2Result run_stage2(const PipelineConfig& config, const PortConfiguration& y_star,
                               CostLedger& ledger, int threads = 0) {
    config.validate();
    if (config.backend.type != BackendSpec::Type::synthetic)
        throw ConfigError("geometry tuning needs the synthetic backend; "
                          "a multiport file fixes the geometry");
    const PortMap ports = enumerate_ports(config.grid);
    if (y_star.size() != ports.size())
        throw ConfigError("port configuration length does not match the grid");

    auto curve_at = [&](const GeometryParams& x) {
        const CircuitModel circuit = build_circuit(x, config.grid, config.substrate.h_mm);
        return oracle_input_reflection(circuit, ports, y_star, config.sweep, config.z0, &ledger);
    };

    const Vector x0 = detail::params_to_vector(config.x0);
    const BoxBounds box = detail::to_box(config.bounds);

    Stage2Result out;
    out.initial_curve = curve_at(config.x0);

    TrResult tr;
    if (config.feature_mode) {
        const auto& fspec = std::get<FeatureObjective>(config.stage2);
        const int q = static_cast<int>(fspec.targets_ghz.size());
        CurveEvaluator raw = [&](const Vector& v) { return curve_at(detail::vector_to_params(v)); };
        FeatureExtractor extract = [q](const ReflectionCurve& c) { return extract_features(c, q); };
        FeatureObjectiveFn objective = [fspec](const FeatureVector& fv) {
            return objective_feature(fv, fspec);
        };
        tr = tr_optimize_features(raw, extract, objective, x0, box, config.tr, threads,
                                  &out.initial_curve);
    } else {
        const auto& freqs = config.sweep.freq_ghz();
        const ObjectiveSpec stage2 = config.stage2;
        VectorEvaluator ev = [&](const Vector& v) -> Vector {
            const ReflectionCurve c = curve_at(detail::vector_to_params(v));
            return Eigen::Map<const Vector>(c.mag_db.data(),
                                            static_cast<Eigen::Index>(c.mag_db.size()));
        };
        ResponseObjective objective = [freqs, stage2](const Vector& levels) {
            std::vector<double> l(levels.data(), levels.data() + levels.size());
            return evaluate_curve_objective(freqs, l, stage2);
        };
        const Vector x0_resp = Eigen::Map<const Vector>(
            out.initial_curve.mag_db.data(),
            static_cast<Eigen::Index>(out.initial_curve.mag_db.size()));
        tr = tr_optimize(ev, objective, x0, box, config.tr, threads, &x0_resp);
    }

    out.x_star = detail::vector_to_params(tr.x_star);
    out.trace = std::move(tr.trace);
    out.final_curve = curve_at(out.x_star);
    return out;
}

/// The whole bi-stage procedure. Stage 1 costs exactly one multiport
/// extraction; stage 2 only single-response solves. The report's final curve
/// is a fresh backend evaluation at (x*, y*), never a surrogate prediction.
inline DesignReport run_pipeline(const PipelineConfig& config, bool keep_table = true,
                                 int threads = 0) {
    config.validate();
    CostLedger ledger(config.extraction_cost_weight);

    Stage1Result s1 = run_stage1(config, ledger, keep_table, threads);
    DesignReport report;
    report.ledger.weight = config.extraction_cost_weight;
    report.y_star = s1.search.best_config;
    report.y_star_index = s1.search.best_index;
    report.stage1_best_value = s1.search.best_value;
    report.stage1_evaluated = s1.search.evaluated_count;
    report.stage1_table = std::move(s1.search.value_table);
    report.impm_curve = std::move(s1.best_impm_curve);
    report.stage1_counts = {ledger.multiport_extractions.load(),
                            ledger.single_response_evaluations.load()};

    Stage2Result s2 = run_stage2(config, report.y_star, ledger, threads);
    report.x_star = s2.x_star;
    report.stage2_trace = std::move(s2.trace);
    report.initial_curve = std::move(s2.initial_curve);
    report.final_curve = std::move(s2.final_curve);
    report.stage2_counts = {
        ledger.multiport_extractions.load() - report.stage1_counts.multiport_extractions,
        ledger.single_response_evaluations.load() - report.stage1_counts.single_response_evaluations};
    report.ledger = ledger;
    report.bands_ghz = detail::bands_below(report.final_curve, -10.0);
    report.resonances_ghz = detail::all_resonances(report.final_curve);
    return report;
}

/// Compares the IMPM prediction against the merged-node oracle on random
/// configurations; returns the worst |Gamma| discrepancy over the sweep.
inline double verify_against_oracle(const PipelineConfig& config, int n_samples,
                                    std::uint32_t seed = 0) {
    config.validate();
    if (config.backend.type != BackendSpec::Type::synthetic)
        throw ConfigError("oracle verification needs the synthetic backend");
    const PortMap ports = enumerate_ports(config.grid);
    const int m = port_count(config.grid);
    const CircuitModel circuit = build_circuit(config.x0, config.grid, config.substrate.h_mm);
    const PartitionedZ p = partition(extract_multiport(circuit, ports, config.sweep));

    std::mt19937 gen(seed);
    double worst = 0.0;
    for (int s = 0; s < n_samples; ++s) {
        PortConfiguration y;
        y.closed.resize(static_cast<std::size_t>(m));
        for (int k = 0; k < m; ++k) y.closed[static_cast<std::size_t>(k)] = (gen() & 1u) != 0;
        const ReflectionCurve impm = evaluate_configuration(p, y, config.z0);
        const ReflectionCurve oracle =
            oracle_input_reflection(circuit, ports, y, config.sweep, config.z0);
        for (std::size_t i = 0; i < impm.size(); ++i)
            worst = std::max(worst, std::abs(impm.gamma[i] - oracle.gamma[i]));
    }
    return worst;
}

} // namespace pixant

#endif // PIXANT_PIPELINE_HPP
