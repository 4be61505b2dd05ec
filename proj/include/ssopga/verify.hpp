#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "linalg.hpp"
#include "objectives.hpp"
#include "solvers.hpp"
#include "sso.hpp"

namespace ssopga {

struct SuiteResult {
    std::string name;
    bool passed = true;
    std::size_t cases = 0;
    std::size_t failures = 0;
    std::string detail;  // worst case / first failure
};

/// (1 + alpha)/2 |z| >= |SSO(z) - 1| on random (alpha, z).
inline SuiteResult lemma1_suite(std::uint64_t seed, std::size_t cases = 100000)
{
    std::mt19937_64 rng(seed);
    SuiteResult res;
    res.name = "lemma1-envelope";
    double worst = std::numeric_limits<double>::infinity();
    double worst_alpha = 0.0, worst_z = 0.0;
    for (std::size_t k = 0; k < cases; ++k) {
        const double alpha = uniform(rng, 0.0, 5.0);
        const double z = uniform(rng, -50.0, 50.0);
        const double s = lemma1_slack(SlidingSigmoid(alpha), z);
        if (s < worst) {
            worst = s;
            worst_alpha = alpha;
            worst_z = z;
        }
        if (!(s >= -1e-12)) ++res.failures;
    }
    res.cases = cases;
    res.passed = res.failures == 0;
    std::ostringstream os;
    os << "min slack " << worst << " at alpha=" << worst_alpha << " z=" << worst_z;
    res.detail = os.str();
    return res;
}

/*
 * One multiplicative step y * SSO(z) against the additive step y - rho z
 * rebuilt from the equivalent step size, plus theta in (0, 1/2].
 */
inline SuiteResult theorem1_suite(std::uint64_t seed, std::size_t cases = 10000)
{
    std::mt19937_64 rng(seed);
    SuiteResult res;
    res.name = "theorem1-equivalence";
    double worst_gap = 0.0;
    double theta_min = std::numeric_limits<double>::infinity();
    double theta_max = 0.0;
    for (std::size_t k = 0; k < cases; ++k) {
        double y = uniform(rng, 0.0, 10.0);
        if (y == 0.0) y = 1e-3;
        const double z = uniform(rng, -20.0, 20.0);
        const SlidingSigmoid op(uniform(rng, 0.0, 5.0));
        const StepEquivalence eq = equivalent_step_size(op, y, z);
        const double multiplicative = y * op(z);
        const double additive = y - eq.rho * z;
        const double gap = std::abs(multiplicative - additive);
        worst_gap = std::max(worst_gap, gap);
        theta_min = std::min(theta_min, eq.theta);
        theta_max = std::max(theta_max, eq.theta);
        if (!(gap <= 1e-12) || !(eq.theta > 0.0) || !(eq.theta <= 0.5 + 1e-12)) ++res.failures;
    }
    res.cases = cases;
    res.passed = res.failures == 0;
    std::ostringstream os;
    os << "max |gap| " << worst_gap << ", theta in [" << theta_min << ", " << theta_max << "]";
    res.detail = os.str();
    return res;
}

struct CertifiedInstance {
    LinearInverseProblem problem;
    Vector y_true;
    Vector y0;
    double alpha;
};

/*
 * Random non-negative problem of size at most 50 x 30. H has U[0,1] entries
 * divided by its spectral norm, x = H y_true, y_true and y0 in (0,1/2], and
 * alpha ~ U[0, 1/2]. With unit norm and iterates of size about 1/2 the
 * descent bound sits near 3, so certified runs are not vacuous.
 */
inline CertifiedInstance random_certified_instance(std::mt19937_64& rng)
{
    const std::size_t rows = 2 + static_cast<std::size_t>(unit_uniform(rng) * 49.0);
    const std::size_t cols = 1 + static_cast<std::size_t>(unit_uniform(rng) * 30.0);
    DenseMatrix H(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) H(i, j) = unit_uniform(rng);
    const double s = spectral_norm(H);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) H(i, j) /= s;
    auto positive = [&] {
        const double v = 0.5 * unit_uniform(rng);
        return v > 0.0 ? v : 0.5;
    };
    Vector y_true(cols), y0(cols);
    for (double& v : y_true) v = positive();
    for (double& v : y0) v = positive();
    Vector x = H.apply(y_true);
    const double alpha = uniform(rng, 0.0, 0.5);
    return {LinearInverseProblem(std::move(H), std::move(x)), std::move(y_true), std::move(y0),
            alpha};
}

inline SolverConfig certified_config(double alpha, std::size_t iters = 1000)
{
    SolverConfig c;
    c.method = Method::sso_pga;
    c.alpha = alpha;
    c.learning_rate = 1.0;
    c.max_iters = iters;
    c.tolerance = 1e-300;
    c.certified = true;
    return c;
}

/// Certified SSO-PGA runs; any monotonicity violation or bound breach fails.
inline SuiteResult theorem2_suite(std::uint64_t seed, std::size_t runs = 100,
                                  std::size_t iters = 1000)
{
    std::mt19937_64 rng(seed);
    SuiteResult res;
    res.name = "theorem2-descent";
    std::size_t total_iters = 0;
    for (std::size_t k = 0; k < runs; ++k) {
        const CertifiedInstance inst = random_certified_instance(rng);
        try {
            const IterationTrace tr =
                run(certified_config(inst.alpha, iters), inst.problem, inst.y0);
            total_iters += tr.iterations();
            const auto v = check_monotone(tr);
            if (!v.empty() || tr.stop_reason == StopReason::nonfinite) {
                ++res.failures;
                if (res.detail.empty()) {
                    std::ostringstream os;
                    os << "run " << k << ": ";
                    if (!v.empty()) {
                        os << "energy rose at iteration " << v.front().iteration << " ("
                           << v.front().previous_energy << " -> " << v.front().energy << ")";
                    } else {
                        os << "non-finite iterate";
                    }
                    res.detail = os.str();
                }
            }
        } catch (const CertificationError& e) {
            ++res.failures;
            if (res.detail.empty()) res.detail = "run " + std::to_string(k) + ": " + e.what();
        }
    }
    res.cases = runs;
    res.passed = res.failures == 0;
    if (res.detail.empty()) res.detail = std::to_string(total_iters) + " certified iterations";
    return res;
}

inline std::vector<SuiteResult> verify_all(std::uint64_t seed)
{
    return {lemma1_suite(seed), theorem1_suite(seed + 1), theorem2_suite(seed + 2)};
}

}  // namespace ssopga
