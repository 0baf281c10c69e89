// pixant: pixel-antenna topology synthesis pipeline.
//
// Subcommands: run, search, tune, curve, verify, features.
// Exit codes: 0 success, 2 configuration/user error, 3 numerical failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "pixant/config.hpp"
#include "pixant/io.hpp"
#include "pixant/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out;
    int threads = 0;
    bool no_table = false;
    std::uint32_t seed = 0;
};

pixant::GeometryParams parse_x_spec(const std::string& spec) {
    std::vector<double> v;
    std::stringstream ss(spec);
    std::string cell;
    while (std::getline(ss, cell, ',')) v.push_back(pixant::detail::parse_double(cell));
    if (v.size() != 4)
        throw pixant::ConfigError("--x expects 4 comma-separated values l,d,alpha,gamma");
    return pixant::GeometryParams::from_array({v[0], v[1], v[2], v[3]});
}

void ensure_dir(const std::string& path) {
    std::error_code ec;
    fs::create_directories(path, ec);
    if (ec) throw pixant::ConfigError("cannot create output directory '" + path + "'");
}

void write_json_file(const nlohmann::ordered_json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw pixant::ConfigError("cannot write '" + path + "'");
    out << j.dump(1) << '\n';
}

int cmd_run(const CommonArgs& args) {
    const auto t0 = std::chrono::steady_clock::now();
    const pixant::LoadedConfig loaded = pixant::load_pipeline_config(args.config_path);
    ensure_dir(args.out);
    ensure_dir(args.out + "/curves");

    const pixant::DesignReport report =
        pixant::run_pipeline(loaded.config, !args.no_table, args.threads);

    write_json_file(pixant::report_to_json(report, loaded.echo), args.out + "/report.json");
    pixant::write_curve_csv(report.impm_curve, args.out + "/curves/impm_stage1.csv");
    pixant::write_curve_csv(report.initial_curve, args.out + "/curves/initial.csv");
    pixant::write_curve_csv(report.final_curve, args.out + "/curves/final.csv");
    pixant::write_trace_csv(report.stage2_trace, args.out + "/trace.csv");
    if (report.stage1_table) {
        pixant::SearchResult table_view;
        table_view.best_config = report.y_star;
        table_view.value_table = report.stage1_table;
        pixant::write_search_table_csv(table_view, args.out + "/search_table.csv");
    }

    std::cout << "y* = " << report.y_star.to_bitstring() << " (index " << report.y_star_index
              << "), stage-1 objective " << report.stage1_best_value << "\n";
    std::cout << "x* = [" << report.x_star.l << ", " << report.x_star.d << ", "
              << report.x_star.alpha << ", " << report.x_star.gamma << "]\n";
    std::cout << "objective: initial " << report.stage2_trace.initial_u << " -> final "
              << report.stage2_trace.final_u << "\n";
    std::cout << "cost: " << report.ledger.single_response_evaluations.load() << " single + "
              << report.ledger.multiport_extractions.load() << " extraction(s) x "
              << report.ledger.weight << " = " << report.ledger.total()
              << " single-response equivalents\n";
    std::cout << "report: " << args.out << "/report.json\n";
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    std::fprintf(stderr, "elapsed: %.2f s\n", dt.count());
    return 0;
}

int cmd_search(const CommonArgs& args) {
    const pixant::LoadedConfig loaded = pixant::load_pipeline_config(args.config_path);
    ensure_dir(args.out);

    pixant::CostLedger ledger(loaded.config.extraction_cost_weight);
    const pixant::Stage1Result s1 =
        pixant::run_stage1(loaded.config, ledger, !args.no_table, args.threads);

    nlohmann::ordered_json j;
    j["y_star"] = s1.search.best_config.to_bitstring();
    j["index"] = s1.search.best_index;
    j["best_value"] = s1.search.best_value;
    j["evaluated_count"] = s1.search.evaluated_count;
    write_json_file(j, args.out + "/search_summary.json");
    pixant::write_curve_csv(s1.best_impm_curve, args.out + "/best_impm_curve.csv");
    if (s1.search.value_table)
        pixant::write_search_table_csv(s1.search, args.out + "/search_table.csv");

    std::cout << "y* = " << s1.search.best_config.to_bitstring() << " (index "
              << s1.search.best_index << "), objective " << s1.search.best_value << " over "
              << s1.search.evaluated_count << " configurations\n";
    return 0;
}

int cmd_tune(const CommonArgs& args, const std::string& y_bits) {
    const pixant::LoadedConfig loaded = pixant::load_pipeline_config(args.config_path);
    ensure_dir(args.out);

    const int m = pixant::port_count(loaded.config.grid);
    if (static_cast<int>(y_bits.size()) != m)
        throw pixant::ConfigError("--y must be a bitstring of length " + std::to_string(m));
    const pixant::PortConfiguration y = pixant::PortConfiguration::from_bitstring(y_bits);

    pixant::CostLedger ledger(loaded.config.extraction_cost_weight);
    const pixant::Stage2Result s2 = pixant::run_stage2(loaded.config, y, ledger, args.threads);

    nlohmann::ordered_json j;
    j["y"] = y_bits;
    j["x_star"] = pixant::detail::params_to_json(s2.x_star);
    j["initial_u"] = s2.trace.initial_u;
    j["final_u"] = s2.trace.final_u;
    j["termination"] = pixant::to_string(s2.trace.termination);
    j["total_evaluator_calls"] = s2.trace.total_evaluator_calls;
    j["cost_total"] = ledger.total();
    write_json_file(j, args.out + "/tune_summary.json");
    pixant::write_trace_csv(s2.trace, args.out + "/trace.csv");
    pixant::write_curve_csv(s2.initial_curve, args.out + "/initial.csv");
    pixant::write_curve_csv(s2.final_curve, args.out + "/final.csv");

    std::cout << "x* = [" << s2.x_star.l << ", " << s2.x_star.d << ", " << s2.x_star.alpha << ", "
              << s2.x_star.gamma << "], objective " << s2.trace.initial_u << " -> "
              << s2.trace.final_u << "\n";
    return 0;
}

int cmd_curve(const CommonArgs& args, const std::string& y_bits,
              const std::optional<std::string>& x_spec, const std::string& out_csv) {
    const pixant::LoadedConfig loaded = pixant::load_pipeline_config(args.config_path);
    const pixant::PipelineConfig& config = loaded.config;
    const pixant::PortMap ports = pixant::enumerate_ports(config.grid);

    if (y_bits.size() != ports.size())
        throw pixant::ConfigError("--y must be a bitstring of length " +
                                  std::to_string(ports.size()));
    const pixant::PortConfiguration y = pixant::PortConfiguration::from_bitstring(y_bits);

    pixant::ReflectionCurve curve;
    if (config.backend.type == pixant::BackendSpec::Type::synthetic) {
        const pixant::GeometryParams x = x_spec ? parse_x_spec(*x_spec) : config.x0;
        const pixant::CircuitModel circuit =
            pixant::build_circuit(x, config.grid, config.substrate.h_mm);
        curve = pixant::oracle_input_reflection(circuit, ports, y, config.sweep, config.z0);
    } else {
        if (x_spec)
            throw pixant::ConfigError("--x is not applicable to a file backend "
                                      "(the file fixes the geometry)");
        const pixant::LoadedMultiport lm = pixant::load_multiport_file(
            config.backend.path, config.backend.format, config.backend.n_ports);
        if (lm.z.n_ports() != static_cast<int>(ports.size()) + 1)
            throw pixant::ConfigError("multiport file port count does not match the grid");
        curve = pixant::evaluate_configuration(pixant::partition(lm.z), y, config.z0);
    }
    pixant::write_curve_csv(curve, out_csv);
    std::cout << "curve written to " << out_csv << "\n";
    return 0;
}

int cmd_verify(const CommonArgs& args, int samples, double tol) {
    const pixant::LoadedConfig loaded = pixant::load_pipeline_config(args.config_path);
    const double worst = pixant::verify_against_oracle(loaded.config, samples, args.seed);
    std::cout << "max |Gamma_impm - Gamma_oracle| over " << samples << " random configurations: "
              << worst << "\n";
    if (worst > tol) {
        std::cerr << "verification failed: discrepancy " << worst << " exceeds " << tol << "\n";
        return 3;
    }
    return 0;
}

int cmd_features(const std::string& curve_path, int q, const std::optional<std::string>& out) {
    const pixant::ReflectionCurve curve = pixant::read_curve_csv(curve_path);
    const pixant::FeatureVector fv = pixant::extract_features(curve, q);
    if (out) {
        std::ofstream f(*out);
        if (!f) throw pixant::ConfigError("cannot write '" + *out + "'");
        f << "omega_ghz,level_db\n";
        for (std::size_t i = 0; i < fv.size(); ++i)
            f << pixant::detail::fmt_double(fv.omega_ghz[i]) << ','
              << pixant::detail::fmt_double(fv.level_db[i]) << '\n';
    } else {
        std::cout << "omega_ghz,level_db\n";
        for (std::size_t i = 0; i < fv.size(); ++i)
            std::cout << pixant::detail::fmt_double(fv.omega_ghz[i]) << ','
                      << pixant::detail::fmt_double(fv.level_db[i]) << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pixel-antenna topology synthesis: multiport reduction, exhaustive "
                 "topology search and trust-region geometry tuning"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string y_bits;
    std::optional<std::string> x_spec;
    std::string out_csv;
    std::string curve_path;
    std::optional<std::string> features_out;
    int samples = 50;
    double tol = 1e-8;
    int q = 2;

    auto add_common = [&](CLI::App* sub, bool needs_out) {
        sub->add_option("--config", args.config_path, "pipeline config (JSON)")->required();
        if (needs_out) sub->add_option("--out", args.out, "output directory")->required();
        sub->add_option("--threads", args.threads, "worker cap (0 = all cores)");
    };

    CLI::App* run = app.add_subcommand("run", "full bi-stage pipeline");
    add_common(run, true);
    run->add_flag("--no-table", args.no_table, "skip the 2^M search table CSV");

    CLI::App* search = app.add_subcommand("search", "stage 1 only: exhaustive topology search");
    add_common(search, true);
    search->add_flag("--no-table", args.no_table, "skip the 2^M search table CSV");

    CLI::App* tune = app.add_subcommand("tune", "stage 2 only: trust-region geometry tuning");
    add_common(tune, true);
    tune->add_option("--y", y_bits, "port bitstring, '1' = closed")->required();

    CLI::App* curve = app.add_subcommand("curve", "reflection curve for a given design");
    curve->add_option("--config", args.config_path, "pipeline config (JSON)")->required();
    curve->add_option("--y", y_bits, "port bitstring, '1' = closed")->required();
    curve->add_option("--x", x_spec, "geometry 'l,d,alpha,gamma' (default: config x0)");
    curve->add_option("--out", out_csv, "output CSV path")->required();

    CLI::App* verify = app.add_subcommand("verify", "compare the reduction against the oracle");
    verify->add_option("--config", args.config_path, "pipeline config (JSON)")->required();
    verify->add_option("--samples", samples, "number of random configurations");
    verify->add_option("--seed", args.seed, "sampling seed");
    verify->add_option("--tol", tol, "acceptable |Gamma| discrepancy");

    CLI::App* features = app.add_subcommand("features", "extract resonances from a curve CSV");
    features->add_option("--curve", curve_path, "curve CSV (freq_ghz,re_gamma,im_gamma,mag_db)")
        ->required();
    features->add_option("-q,--count", q, "number of features");
    features->add_option("--out", features_out, "output CSV (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) return cmd_run(args);
        if (search->parsed()) return cmd_search(args);
        if (tune->parsed()) return cmd_tune(args, y_bits);
        if (curve->parsed()) return cmd_curve(args, y_bits, x_spec, out_csv);
        if (verify->parsed()) return cmd_verify(args, samples, tol);
        if (features->parsed()) return cmd_features(curve_path, q, features_out);
    } catch (const pixant::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const pixant::NumericError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
