#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bench.hpp"
#include "json_io.hpp"
#include "solvers.hpp"
#include "svg_plot.hpp"
#include "trace_io.hpp"
#include "verify.hpp"

namespace ssopga {

enum ExitCode : int { exit_ok = 0, exit_property_failure = 1, exit_usage = 2, exit_io = 3 };

/// --out wins; otherwise $SSOPGA_OUT/<preset>, otherwise results/<preset>.
inline std::filesystem::path bench_output_dir(const std::string& out_flag,
                                              const std::string& preset)
{
    if (!out_flag.empty()) return out_flag;
    if (const char* env = std::getenv("SSOPGA_OUT"); env != nullptr && *env != '\0') {
        return std::filesystem::path(env) / preset;
    }
    return std::filesystem::path("results") / preset;
}

/*
 * "problem" selects the objective: a scalar benchmark id ("I", "II", "I+",
 * "II+"), an inline {"H", "x"} object, or {"path": FILE}. An optional
 * "prox_weight" adds lambda ||y||_1 to inverse problems.
 */
inline CompositeObjective objective_from_json(const nlohmann::json& j,
                                              const std::filesystem::path& base)
{
    const nlohmann::json& p = detail::require_field(j, "problem", "config");
    if (p.is_string()) return make_scalar_benchmark(p.get<std::string>());
    if (!p.is_object()) throw std::invalid_argument("config: 'problem' must be a string or object");
    const double w = j.value("prox_weight", 0.0);
    const ProximalTerm prox = w > 0.0 ? ProximalTerm::l1(w) : ProximalTerm::identity();
    if (p.contains("path")) {
        std::filesystem::path file = p.at("path").get<std::string>();
        if (file.is_relative()) file = base / file;
        return as_objective(problem_from_json(load_json_file(file)), prox, file.stem().string());
    }
    return as_objective(problem_from_json(p), prox, "inline");
}

inline MultiModalModel multimodal_model_from_json(const nlohmann::json& j,
                                                  const std::filesystem::path& base)
{
    const nlohmann::json& m = j.at("multimodal");
    if (m.is_object() && m.contains("path")) {
        std::filesystem::path file = m.at("path").get<std::string>();
        if (file.is_relative()) file = base / file;
        return multimodal_from_json(load_json_file(file));
    }
    return multimodal_from_json(m);
}

inline Vector parse_vector_flag(const std::string& text, const char* flag)
{
    if (text.empty()) throw std::invalid_argument(std::string(flag) + ": empty vector");
    try {
        return split_vector(text, ',');
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(std::string(flag) + ": " + e.what());
    }
}

inline Vector parse_y0(const std::string& text) { return parse_vector_flag(text, "--y0"); }

/*
 * solve for a config with a "multimodal" key. --y0 is H0, --t0 is T0
 * (defaults to --y0). The H trace carries the total objective; with --out
 * the T trace goes next to it as <stem>_T.csv.
 */
inline int solve_multimodal_cli(const nlohmann::json& j, const SolverConfig& cfg,
                                const std::filesystem::path& base, const std::string& y0_text,
                                const std::string& t0_text, const std::string& out_path,
                                std::ostream& out)
{
    const MultiModalModel m = multimodal_model_from_json(j, base);
    const Vector H0 = parse_y0(y0_text);
    const Vector T0 = t0_text.empty() ? H0 : parse_vector_flag(t0_text, "--t0");
    const MultiModalResult r = solve_multimodal(m, H0, T0, cfg.max_iters, cfg.tolerance,
                                                cfg.record_dimension_cap);
    const IterationTrace h = objective_trace(r);
    if (out_path.empty()) {
        write_trace_csv(out, h);
        return 0;
    }
    const std::filesystem::path p = out_path;
    write_file_atomic(p, trace_to_csv(h));
    write_file_atomic(p.parent_path() / (p.stem().string() + "_T.csv"), trace_to_csv(r.t_trace));
    out << to_string(r.stop_reason) << " after " << h.iterations() << " iterations, objective "
        << format_double(r.objective.back()) << '\n';
    return 0;
}

inline int cli_main(int argc, char** argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr)
{
    CLI::App app{"Sliding-sigmoid proximal gradient solvers and benchmarks", "ssopga"};
    app.require_subcommand(1);

    std::uint64_t seed = 1;
    std::string out_path;

    auto* bench = app.add_subcommand("bench", "Run a named experiment preset");
    std::string preset;
    std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
    bench->add_option("preset", preset, "Preset name (see `presets`)")->required();
    bench->add_option("--out", out_path, "Output directory");
    bench->add_option("--jobs", jobs, "Concurrent grid cells")->check(CLI::PositiveNumber);
    bench->add_option("--seed", seed, "Seed for randomized presets");

    auto* solve = app.add_subcommand("solve", "Run one solver configuration");
    std::string config_path, y0_text, t0_text;
    solve->add_option("--config", config_path, "Config JSON")->required();
    solve->add_option("--y0", y0_text, "Initial point, comma-separated")->required();
    solve->add_option("--t0", t0_text, "Initial embedding for multimodal configs");
    solve->add_option("--out", out_path, "Trace CSV path (default: stdout)");

    auto* plot = app.add_subcommand("plot", "Render trace CSVs to SVG");
    std::vector<std::string> trace_files;
    plot->add_option("--out", out_path, "SVG path")->required();
    plot->add_option("traces", trace_files, "Trace CSV files")->required();

    auto* presets = app.add_subcommand("presets", "List the experiment presets");

    auto* verify = app.add_subcommand("verify", "Run the operator and descent property suites");
    verify->add_option("--seed", seed, "Seed for the randomized suites");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return exit_usage;
    }

    try {
        if (*presets) {
            for (const std::string& name : preset_names()) {
                out << name << "  " << make_preset(name, seed).description << '\n';
            }
            return exit_ok;
        }
        if (*verify) {
            bool ok = true;
            for (const SuiteResult& r : verify_all(seed)) {
                out << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << r.cases << " cases, "
                    << r.failures << " failures): " << r.detail << '\n';
                ok = ok && r.passed;
            }
            return ok ? exit_ok : exit_property_failure;
        }
        if (*bench) {
            const ExperimentPreset p = make_preset(preset, seed);
            const auto dir = bench_output_dir(out_path, preset);
            const ComparisonSummary s = run_preset(p, dir, jobs, seed);
            out << "wrote " << s.rows.size() << " cells to " << dir.string() << '\n';
            for (const SummaryRow& r : s.rows) {
                if (!r.error.empty()) err << r.trace_file << ": " << r.error << '\n';
            }
            return s.all_certified() ? exit_ok : exit_property_failure;
        }
        if (*solve) {
            const std::filesystem::path cfg_file = config_path;
            const nlohmann::json j = load_json_file(cfg_file);
            const SolverConfig cfg = config_from_json(j);
            if (j.contains("multimodal")) {
                return solve_multimodal_cli(j, cfg, cfg_file.parent_path(), y0_text, t0_text,
                                            out_path, out);
            }
            const CompositeObjective obj = objective_from_json(j, cfg_file.parent_path());
            const IterationTrace tr = run(cfg, obj, parse_y0(y0_text));
            if (out_path.empty()) {
                write_trace_csv(out, tr);
            } else {
                write_file_atomic(out_path, trace_to_csv(tr));
                out << to_string(tr.stop_reason) << " after " << tr.iterations()
                    << " iterations, energy " << format_double(tr.final().energy) << '\n';
            }
            return exit_ok;
        }
        if (*plot) {
            std::vector<std::filesystem::path> files(trace_files.begin(), trace_files.end());
            plot_traces(files, out_path);
            return exit_ok;
        }
    } catch (const UnknownPresetError& e) {
        err << "error: " << e.what() << " (run `ssopga presets`)\n";
        return exit_usage;
    } catch (const CertificationError& e) {
        err << "error: " << e.what() << '\n';
        return exit_property_failure;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return exit_io;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_io;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return exit_io;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::logic_error& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }
    return exit_usage;
}

}  // namespace ssopga
