#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "multimodal.hpp"
#include "objectives.hpp"
#include "solvers.hpp"
#include "trace_io.hpp"
#include "verify.hpp"

namespace ssopga {

inline constexpr std::size_t bench_budget = 50000;
inline constexpr double bench_stop_tolerance = 1e-15;
inline constexpr double bench_target_tolerance = 1e-3;
// Cells without a single known minimizer (consistent problems, minimum 0).
inline constexpr double bench_energy_target = 1e-6;

class UnknownPresetError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/*
 * One grid cell. Either a solver run (objective set) or an alternating
 * multimodal run (multimodal set). iters_to_tol uses ||y - target||_inf
 * <= 1e-3 when target is non-empty, energy <= 1e-6 otherwise.
 */
struct BenchCell {
    SolverConfig config;
    std::shared_ptr<const CompositeObjective> objective;
    std::shared_ptr<const MultiModalInstance> multimodal;
    Vector y0;
    Vector t0;
    double y0_key = 0.0;
    std::string y0_label;
    std::string variant;
    Vector target;
};

struct ExperimentPreset {
    std::string name;
    std::string description;
    std::vector<BenchCell> cells;
};

struct SummaryRow {
    Method method = Method::sso_pga;
    double alpha = 0.0;
    double learning_rate = 0.0;
    std::optional<double> clip;
    double epsilon = 0.0;
    std::string variant;
    std::string y0;
    std::optional<std::size_t> iters_to_tol;
    std::size_t iterations = 0;
    double final_energy = 0.0;
    Vector final_iterate;
    StopReason stop_reason = StopReason::max_iters;
    std::string trace_file;
    std::vector<std::string> extra_files;
    std::string error;  // certification failure, empty otherwise
};

struct ComparisonSummary {
    std::string preset;
    std::uint64_t seed = 0;
    std::vector<SummaryRow> rows;

    bool all_certified() const
    {
        return std::all_of(rows.begin(), rows.end(),
                           [](const SummaryRow& r) { return r.error.empty(); });
    }
};

inline const std::vector<std::string>& preset_names()
{
    static const std::vector<std::string> names = {
        "fig3-problem1",   "fig4-problem2",  "appendix-p1",     "appendix-p1plus",
        "appendix-p2",     "appendix-p2plus", "limitation-min6", "theorem2-random",
        "leeseung-hazard", "multimodal-toy"};
    return names;
}

namespace detail {

inline std::string compact(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

inline SolverConfig bench_config(Method method, double alpha, double lr)
{
    SolverConfig c;
    c.method = method;
    c.alpha = alpha;
    c.learning_rate = lr;
    c.max_iters = bench_budget;
    c.tolerance = bench_stop_tolerance;
    return c;
}

inline BenchCell scalar_cell(const std::shared_ptr<const CompositeObjective>& obj,
                             const SolverConfig& cfg, double y0, double target,
                             std::string variant = {})
{
    BenchCell c;
    c.config = cfg;
    c.objective = obj;
    c.y0 = {y0};
    c.y0_key = y0;
    c.y0_label = compact(y0);
    c.variant = std::move(variant);
    c.target = {target};
    return c;
}

// SSO-PGA at lr = 1 per init, PGA at every grid step per init.
inline std::vector<BenchCell> scalar_sweep(ScalarProblemId id, double sso_alpha,
                                           const std::vector<double>& lrs,
                                           const std::vector<double>& inits)
{
    auto obj = std::make_shared<const CompositeObjective>(make_scalar_benchmark(id));
    const double target = scalar_benchmark_minimizer(id);
    std::vector<BenchCell> cells;
    for (double y0 : inits)
        cells.push_back(scalar_cell(obj, bench_config(Method::sso_pga, sso_alpha, 1.0), y0, target));
    for (double lr : lrs)
        for (double y0 : inits)
            cells.push_back(scalar_cell(obj, bench_config(Method::pga, 0.0, lr), y0, target));
    return cells;
}

inline const std::vector<double>& figure_inits()
{
    static const std::vector<double> v = {1.0, 4.0, 8.0, 16.0};
    return v;
}

inline const std::vector<double>& figure_lrs()
{
    static const std::vector<double> v = {0.0005, 0.005};
    return v;
}

inline const std::vector<double>& appendix_lrs()
{
    static const std::vector<double> v = {1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 0.5, 1.0, 10.0};
    return v;
}

inline std::vector<BenchCell> limitation_cells()
{
    auto obj = std::make_shared<const CompositeObjective>(
        CompositeObjective{std::make_shared<ScalarEnergy>(6.0), ProximalTerm::identity(),
                           "(y-6)^2"});
    std::vector<BenchCell> cells;
    SolverConfig sso = bench_config(Method::sso_pga, 0.0, 1.0);
    sso.oscillation_window = 32;
    cells.push_back(scalar_cell(obj, sso, 1.0, 6.0, "noclip"));
    sso.clip = 0.1;
    cells.push_back(scalar_cell(obj, sso, 1.0, 6.0, "clip"));
    for (double lr : figure_lrs())
        cells.push_back(scalar_cell(obj, bench_config(Method::pga, 0.0, lr), 1.0, 6.0));
    return cells;
}

// H = [1; 0], x = [0; 1]: H^T x = 0, so Lee-Seung zeroes y and then divides
// 0 by 0.
inline LinearInverseProblem hazard_problem()
{
    return LinearInverseProblem(DenseMatrix::from_rows({{1.0}, {0.0}}), {0.0, 1.0});
}

inline std::vector<BenchCell> hazard_cells()
{
    auto obj = std::make_shared<const CompositeObjective>(
        as_objective(hazard_problem(), ProximalTerm::identity(), "hazard"));
    std::vector<BenchCell> cells;
    SolverConfig sso = bench_config(Method::sso_pga, 0.0, 1.0);
    sso.max_iters = 1000;
    cells.push_back(scalar_cell(obj, sso, 1.0, 0.0));
    SolverConfig ls = bench_config(Method::lee_seung, 0.0, 1.0);
    cells.push_back(scalar_cell(obj, ls, 1.0, 0.0, "eps0"));
    ls.epsilon = 1e-12;
    cells.push_back(scalar_cell(obj, ls, 1.0, 0.0, "eps1e-12"));
    return cells;
}

inline std::vector<BenchCell> theorem2_cells(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::vector<BenchCell> cells;
    for (std::size_t k = 0; k < 100; ++k) {
        CertifiedInstance inst = random_certified_instance(rng);
        BenchCell c;
        c.config = certified_config(inst.alpha);
        c.config.tolerance = bench_stop_tolerance;
        c.objective = std::make_shared<const CompositeObjective>(
            as_objective(std::move(inst.problem), ProximalTerm::identity(), "random"));
        c.y0 = std::move(inst.y0);
        c.y0_key = static_cast<double>(k);
        char buf[16];
        std::snprintf(buf, sizeof buf, "run%03zu", k);
        c.y0_label = buf;
        cells.push_back(std::move(c));
    }
    return cells;
}

inline std::vector<BenchCell> multimodal_cells(std::uint64_t seed)
{
    std::vector<BenchCell> cells;
    for (double gamma : {0.5, 0.0}) {
        auto inst = std::make_shared<MultiModalInstance>(make_consistent_multimodal(16, seed, gamma));
        BenchCell c;
        c.config = bench_config(Method::sso_pga, inst->model.alpha1, 1.0);
        c.config.max_iters = 5000;
        c.multimodal = inst;
        c.y0.assign(16, 0.5);
        c.t0.assign(16, 0.5);
        c.y0_key = 0.5;
        c.y0_label = "0.5";
        c.variant = gamma == 0.0 ? "gamma0" : "coupled";
        cells.push_back(std::move(c));
    }
    return cells;
}

}  // namespace detail

/// Builds the named preset. seed drives the randomized presets only.
inline ExperimentPreset make_preset(const std::string& name, std::uint64_t seed)
{
    using namespace detail;
    ExperimentPreset p;
    p.name = name;
    if (name == "fig3-problem1") {
        p.description = "Problem I, SSO-PGA vs PGA, inits {1,4,8,16}, lr {0.0005,0.005}";
        p.cells = scalar_sweep(ScalarProblemId::I, 0.0, figure_lrs(), figure_inits());
    } else if (name == "fig4-problem2") {
        p.description = "Problem II (l1), SSO-PGA vs PGA, inits {1,4,8,16}, lr {0.0005,0.005}";
        p.cells = scalar_sweep(ScalarProblemId::II, 1.0, figure_lrs(), figure_inits());
    } else if (name == "appendix-p1") {
        p.description = "Problem I learning-rate sweep";
        p.cells = scalar_sweep(ScalarProblemId::I, 0.0, appendix_lrs(), figure_inits());
    } else if (name == "appendix-p1plus") {
        p.description = "Problem I+ learning-rate sweep";
        p.cells = scalar_sweep(ScalarProblemId::I_plus, 0.0, appendix_lrs(), figure_inits());
    } else if (name == "appendix-p2") {
        p.description = "Problem II learning-rate sweep";
        p.cells = scalar_sweep(ScalarProblemId::II, 1.0, appendix_lrs(), figure_inits());
    } else if (name == "appendix-p2plus") {
        p.description = "Problem II+ learning-rate sweep";
        p.cells = scalar_sweep(ScalarProblemId::II_plus, 1.0, appendix_lrs(), figure_inits());
    } else if (name == "limitation-min6") {
        p.description = "(y-6)^2 from y0=1: SSO-PGA with and without clip [-0.1,0.1], PGA";
        p.cells = limitation_cells();
    } else if (name == "theorem2-random") {
        p.description = "100 certified SSO-PGA runs on random non-negative inverse problems";
        p.cells = theorem2_cells(seed);
    } else if (name == "leeseung-hazard") {
        p.description = "Lee-Seung (eps 0 and 1e-12) vs SSO-PGA on a zero-numerator instance";
        p.cells = hazard_cells();
    } else if (name == "multimodal-toy") {
        p.description = "Alternating SSO-PGA on a consistent 16-dim instance, coupled and gamma=0";
        p.cells = multimodal_cells(seed);
    } else {
        throw UnknownPresetError("unknown preset '" + name + "'");
    }
    return p;
}

/// First record index meeting the cell's tolerance rule, if any.
inline std::optional<std::size_t> iters_to_tolerance(const IterationTrace& trace,
                                                     std::span<const double> target)
{
    for (const IterationRecord& r : trace.records) {
        if (target.empty()) {
            if (r.energy <= bench_energy_target) return r.iter;
            continue;
        }
        if (r.iterate.size() != target.size()) continue;
        double d = 0.0;
        for (std::size_t i = 0; i < target.size(); ++i)
            d = std::max(d, std::abs(r.iterate[i] - target[i]));
        if (d <= bench_target_tolerance) return r.iter;
    }
    return std::nullopt;
}

inline std::string cell_file_stem(const BenchCell& c)
{
    using detail::compact;
    std::string s = to_string(c.config.method) + "_alpha" + compact(c.config.alpha);
    if (c.config.method != Method::lee_seung) s += "_lr" + compact(c.config.learning_rate);
    if (c.config.clip) s += "_clip" + compact(*c.config.clip);
    if (c.config.method == Method::lee_seung) s += "_eps" + compact(c.config.epsilon);
    if (!c.variant.empty()) s += "_" + c.variant;
    s += "_y0_" + c.y0_label;
    return s;
}

namespace detail {

inline SummaryRow run_cell(const BenchCell& c, const std::filesystem::path& dir)
{
    SummaryRow row;
    row.method = c.config.method;
    row.alpha = c.config.alpha;
    row.learning_rate = c.config.learning_rate;
    row.clip = c.config.clip;
    row.epsilon = c.config.epsilon;
    row.variant = c.variant;
    row.y0 = c.y0_label;
    const std::string stem = cell_file_stem(c);
    row.trace_file = stem + ".csv";

    if (c.multimodal) {
        const MultiModalResult r = solve_multimodal(c.multimodal->model, c.y0, c.t0,
                                                    c.config.max_iters, c.config.tolerance);
        const IterationTrace h = objective_trace(r);
        row.iters_to_tol = iters_to_tolerance(h, {});
        row.iterations = h.iterations();
        row.final_energy = r.objective.back();
        row.final_iterate = r.H;
        row.stop_reason = r.stop_reason;
        row.extra_files.push_back(stem + "_T.csv");
        write_file_atomic(dir / row.trace_file, trace_to_csv(h));
        write_file_atomic(dir / row.extra_files.back(), trace_to_csv(r.t_trace));
        return row;
    }

    IterationTrace trace;
    try {
        trace = run(c.config, *c.objective, c.y0);
    } catch (const CertificationError& e) {
        row.error = e.what();
        row.stop_reason = StopReason::max_iters;
        row.final_energy = std::numeric_limits<double>::quiet_NaN();
        write_file_atomic(dir / row.trace_file, std::string(trace_csv_header) + "\n");
        return row;
    }
    row.iters_to_tol = iters_to_tolerance(trace, c.target);
    row.iterations = trace.iterations();
    row.final_energy = trace.final().energy;
    row.final_iterate = trace.final().iterate;
    if (row.final_iterate.empty()) row.final_iterate = {trace.final().iterate_inf_norm};
    row.stop_reason = trace.stop_reason;
    write_file_atomic(dir / row.trace_file, trace_to_csv(trace));
    return row;
}

}  // namespace detail

inline std::string summary_csv(const ComparisonSummary& s)
{
    std::string out = "method,alpha,learning_rate,clip,y0,iters_to_tol,final_energy,final_iterate,"
                      "stop_reason\n";
    for (const SummaryRow& r : s.rows) {
        out += to_string(r.method) + "," + format_shortest(r.alpha) + ","
               + format_shortest(r.learning_rate) + "," + (r.clip ? format_shortest(*r.clip) : "")
               + "," + r.y0 + ","
               + (r.iters_to_tol ? std::to_string(*r.iters_to_tol) : std::string("DNF")) + ","
               + format_double(r.final_energy) + "," + join_vector(r.final_iterate) + ","
               + (r.error.empty() ? to_string(r.stop_reason) : std::string("certification_error"))
               + "\n";
    }
    return out;
}

inline nlohmann::json summary_json(const ComparisonSummary& s)
{
    auto num = [](double v) -> nlohmann::json {
        if (std::isfinite(v)) return v;
        return nullptr;
    };
    nlohmann::json rows = nlohmann::json::array();
    for (const SummaryRow& r : s.rows) {
        nlohmann::json it = nlohmann::json::array();
        for (double v : r.final_iterate) it.push_back(num(v));
        nlohmann::json j = {{"method", to_string(r.method)},
                            {"alpha", r.alpha},
                            {"learning_rate", r.learning_rate},
                            {"clip", r.clip ? nlohmann::json(*r.clip) : nlohmann::json(nullptr)},
                            {"epsilon", r.epsilon},
                            {"variant", r.variant},
                            {"y0", r.y0},
                            {"iters_to_tol", r.iters_to_tol ? nlohmann::json(*r.iters_to_tol)
                                                            : nlohmann::json("DNF")},
                            {"iterations", r.iterations},
                            {"final_energy", num(r.final_energy)},
                            {"final_iterate", it},
                            {"stop_reason", to_string(r.stop_reason)},
                            {"trace", r.trace_file}};
        if (!r.extra_files.empty()) j["extra_traces"] = r.extra_files;
        if (!r.error.empty()) j["error"] = r.error;
        rows.push_back(std::move(j));
    }
    return {{"preset", s.preset},
            {"seed", s.seed},
            {"budget", bench_budget},
            {"target_tolerance", bench_target_tolerance},
            {"rows", rows}};
}

/*
 * Runs every cell (up to `jobs` at a time), writes one trace CSV per cell,
 * then summary.csv and summary.json. Rows are ordered by method, learning
 * rate, y0, with the preset's own order breaking ties.
 */
inline ComparisonSummary run_preset(const ExperimentPreset& preset,
                                    const std::filesystem::path& out_dir, std::size_t jobs,
                                    std::uint64_t seed)
{
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir)) {
        throw IoError("cannot create output directory " + out_dir.string());
    }

    std::vector<std::size_t> order(preset.cells.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const BenchCell& x = preset.cells[a];
        const BenchCell& y = preset.cells[b];
        if (x.config.method != y.config.method) return x.config.method < y.config.method;
        if (x.config.learning_rate != y.config.learning_rate)
            return x.config.learning_rate < y.config.learning_rate;
        return x.y0_key < y.y0_key;
    });

    ComparisonSummary summary;
    summary.preset = preset.name;
    summary.seed = seed;
    summary.rows.resize(order.size());

    std::atomic<std::size_t> next{0};
    std::mutex err_mu;
    std::exception_ptr first_error;
    auto worker = [&] {
        while (true) {
            const std::size_t k = next++;
            if (k >= order.size()) return;
            try {
                summary.rows[k] = detail::run_cell(preset.cells[order[k]], out_dir);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    const std::size_t n_threads = std::max<std::size_t>(1, std::min(jobs, order.size()));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    write_file_atomic(out_dir / "summary.csv", summary_csv(summary));
    write_file_atomic(out_dir / "summary.json", summary_json(summary).dump(2) + "\n");
    return summary;
}

}  // namespace ssopga
