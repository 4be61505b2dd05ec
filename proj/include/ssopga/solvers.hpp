#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "linalg.hpp"
#include "objectives.hpp"
#include "sso.hpp"

namespace ssopga {

enum class Method { sso_pga, pga, lee_seung };

enum class StopReason { converged, max_iters, nonfinite, oscillation_detected };

inline std::string to_string(Method m)
{
    switch (m) {
    case Method::sso_pga: return "SSO_PGA";
    case Method::pga: return "PGA";
    case Method::lee_seung: return "LEE_SEUNG";
    }
    return "?";
}

inline Method parse_method(std::string_view s)
{
    if (s == "SSO_PGA") return Method::sso_pga;
    if (s == "PGA") return Method::pga;
    if (s == "LEE_SEUNG") return Method::lee_seung;
    throw std::invalid_argument("unknown method '" + std::string(s)
                                + "' (expected SSO_PGA, PGA or LEE_SEUNG)");
}

inline std::string to_string(StopReason r)
{
    switch (r) {
    case StopReason::converged: return "converged";
    case StopReason::max_iters: return "max_iters";
    case StopReason::nonfinite: return "nonfinite";
    case StopReason::oscillation_detected: return "oscillation_detected";
    }
    return "?";
}

inline StopReason parse_stop_reason(std::string_view s)
{
    if (s == "converged") return StopReason::converged;
    if (s == "max_iters") return StopReason::max_iters;
    if (s == "nonfinite") return StopReason::nonfinite;
    if (s == "oscillation_detected") return StopReason::oscillation_detected;
    throw std::invalid_argument("unknown stop reason '" + std::string(s) + "'");
}

/*
 * Run parameters.
 *
 *   learning_rate  PGA: the step size rho. SSO_PGA: pre-scale of the
 *                  gradient fed to the operator (1 gives the plain
 *                  multiplicative update). Unused by LEE_SEUNG.
 *   tolerance      stop when |E_t - E_{t-1}| <= tol * max(1, E_{t-1})
 *                  or ||y_t - y_{t-1}||_inf <= tol.
 *   clip           SSO_PGA only: the scaled gradient is clamped to [-c, c].
 *   epsilon        LEE_SEUNG denominator stabilizer.
 *   certified      SSO_PGA on a LinearInverseProblem: before every step,
 *                  alpha is checked against alpha_upper_bound at the current
 *                  iterate and a CertificationError is thrown if it exceeds it.
 *   oscillation_window  when > 0, the run stops with oscillation_detected as
 *                  soon as detect_oscillation fires over this window.
 *   record_dimension_cap  full iterates are stored in the trace only up to
 *                  this dimension; above it only the inf-norm is kept.
 */
struct SolverConfig {
    Method method = Method::sso_pga;
    double alpha = 0.0;
    double learning_rate = 1.0;
    std::size_t max_iters = 1000;
    double tolerance = 1e-6;
    std::optional<double> clip;
    double epsilon = 0.0;
    bool certified = false;
    std::size_t oscillation_window = 0;
    std::size_t record_dimension_cap = 64;

    void validate() const
    {
        if (max_iters < 1) throw std::invalid_argument("SolverConfig: max_iters must be >= 1");
        if (!(tolerance > 0.0)) throw std::invalid_argument("SolverConfig: tolerance must be > 0");
        if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
            throw std::invalid_argument("SolverConfig: learning_rate must be > 0");
        }
        if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
            throw std::invalid_argument("SolverConfig: alpha must be >= 0");
        }
        if (clip && !(*clip > 0.0)) throw std::invalid_argument("SolverConfig: clip must be > 0");
        if (!(epsilon >= 0.0)) throw std::invalid_argument("SolverConfig: epsilon must be >= 0");
        if (oscillation_window != 0 && oscillation_window < 4) {
            throw std::invalid_argument("SolverConfig: oscillation_window must be 0 or >= 4");
        }
        if (certified && method != Method::sso_pga) {
            throw std::invalid_argument("SolverConfig: certified mode applies to SSO_PGA only");
        }
    }
};

struct IterationRecord {
    std::size_t iter = 0;
    Vector iterate;  // empty when the dimension exceeds the record cap
    double iterate_inf_norm = 0.0;
    double energy = 0.0;
    double grad_inf_norm = 0.0;
    std::optional<double> mult_min;
    std::optional<double> mult_max;
};

struct IterationTrace {
    Method method = Method::sso_pga;
    std::size_t dimension = 0;
    double tolerance = 0.0;
    std::vector<IterationRecord> records;
    StopReason stop_reason = StopReason::max_iters;

    const IterationRecord& initial() const { return records.front(); }
    const IterationRecord& final() const { return records.back(); }
    std::size_t iterations() const { return records.empty() ? 0 : records.size() - 1; }
};

/// Thrown by certified runs when alpha exceeds the descent bound.
class CertificationError : public std::runtime_error {
public:
    CertificationError(std::size_t iteration, double alpha, double bound)
        : std::runtime_error("certified run: alpha " + std::to_string(alpha)
                             + " exceeds the descent bound " + std::to_string(bound)
                             + " before iteration " + std::to_string(iteration)),
          iteration_(iteration), alpha_(alpha), bound_(bound) {}

    std::size_t iteration() const noexcept { return iteration_; }
    double alpha() const noexcept { return alpha_; }
    double bound() const noexcept { return bound_; }

private:
    std::size_t iteration_;
    double alpha_;
    double bound_;
};

/// Result of one multiplicative step with its diagnostics.
struct MultiplicativeStep {
    Vector next;
    double mult_min = std::numeric_limits<double>::quiet_NaN();
    double mult_max = std::numeric_limits<double>::quiet_NaN();
    bool finite = true;
};

namespace detail {

inline void require_non_negative(std::span<const double> y, const char* who)
{
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!(y[i] >= 0.0)) {
            throw DomainError(std::string(who) + ": component " + std::to_string(i)
                                  + " is negative or NaN",
                              static_cast<std::ptrdiff_t>(i));
        }
    }
}

// y <- prox(y .* SSO(u), tau) with u = clip(lr * g). The threshold of
// coordinate i is lambda * rho_i, rho_i being the additive step that the
// multiplicative update is equivalent to; that keeps the fixed points those
// of proximal gradient (grad E = -lambda on the support).
inline MultiplicativeStep sso_update(std::span<const double> y, std::span<const double> g,
                                     const SlidingSigmoid& op, double lr,
                                     std::optional<double> clip, const ProximalTerm& prox)
{
    MultiplicativeStep step;
    step.next.resize(y.size());
    Vector tau;
    const bool thresholded = !prox.is_identity();
    if (thresholded) tau.resize(y.size());
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < y.size(); ++i) {
        double u = lr * g[i];
        if (!std::isfinite(u)) {
            step.finite = false;
            step.next[i] = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        bool clipped = false;
        if (clip && std::abs(u) > *clip) {
            u = std::copysign(*clip, u);
            clipped = true;
        }
        const double m = op(u);
        lo = std::min(lo, m);
        hi = std::max(hi, m);
        step.next[i] = y[i] * m;
        if (thresholded) {
            const double theta = op.theta(u);
            const double rho = clipped ? y[i] * theta * u / g[i] : y[i] * theta * lr;
            tau[i] = prox.weight() * rho;
        }
    }
    if (!y.empty() && lo <= hi) {
        step.mult_min = lo;
        step.mult_max = hi;
    }
    if (step.finite && thresholded) step.next = prox.prox(step.next, tau);
    if (!all_finite(step.next)) step.finite = false;
    return step;
}

inline Vector pga_update(std::span<const double> y, std::span<const double> g, double rho,
                         const ProximalTerm& prox)
{
    Vector v(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) v[i] = y[i] - rho * g[i];
    if (!all_finite(v)) return v;
    return prox.prox(v, rho * prox.weight());
}

}  // namespace detail

/// Proximal gradient step: prox(y - rho grad E(y), rho * lambda).
inline Vector pga_step(const SmoothEnergy& smooth, const ProximalTerm& prox,
                       std::span<const double> y, double rho)
{
    if (!(rho > 0.0)) throw std::invalid_argument("pga_step: rho must be > 0");
    const Vector g = smooth.gradient(y);
    return detail::pga_update(y, g, rho, prox);
}

/// Multiplicative step with diagnostics; see sso_pga_step.
inline MultiplicativeStep sso_pga_step_detailed(const SmoothEnergy& smooth,
                                                const ProximalTerm& prox,
                                                std::span<const double> y,
                                                const SlidingSigmoid& op, double lr,
                                                std::optional<double> clip = std::nullopt)
{
    if (!(lr > 0.0)) throw std::invalid_argument("sso_pga_step: lr must be > 0");
    detail::require_non_negative(y, "sso_pga_step");
    const Vector g = smooth.gradient(y);
    return detail::sso_update(y, g, op, lr, clip, prox);
}

/// y .* SSO_alpha(clip(lr * grad E(y))) followed by the proximal map.
/// Non-finite results are returned as-is (NaN components) for the caller to
/// detect.
inline Vector sso_pga_step(const SmoothEnergy& smooth, const ProximalTerm& prox,
                           std::span<const double> y, const SlidingSigmoid& op, double lr,
                           std::optional<double> clip = std::nullopt)
{
    return sso_pga_step_detailed(smooth, prox, y, op, lr, clip).next;
}

/// y_i (H^T x)_i / ((H^T H y)_i + epsilon). A zero denominator is not masked.
inline Vector lee_seung_step(const LinearInverseProblem& p, std::span<const double> y,
                             double epsilon)
{
    if (!(epsilon >= 0.0)) throw std::invalid_argument("lee_seung_step: epsilon must be >= 0");
    if (y.size() != p.dimension()) {
        throw std::invalid_argument("lee_seung_step: dimension mismatch");
    }
    const Vector numer = p.H().apply_adjoint(p.x());
    const Vector denom = p.H().apply_adjoint(p.H().apply(y));
    Vector out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        out[i] = y[i] / (denom[i] + epsilon) * numer[i];
    }
    return out;
}

struct MonotoneViolation {
    std::size_t iteration;
    double previous_energy;
    double energy;
};

/// Every t with E_t > E_{t-1} (1 + 1e-12) + 1e-15. Empty means the trace is
/// monotonically non-increasing.
inline std::vector<MonotoneViolation> check_monotone(const IterationTrace& trace)
{
    std::vector<MonotoneViolation> out;
    for (std::size_t t = 1; t < trace.records.size(); ++t) {
        const double prev = trace.records[t - 1].energy;
        const double cur = trace.records[t].energy;
        if (!(cur <= prev * (1.0 + 1e-12) + 1e-15)) {
            out.push_back({trace.records[t].iter, prev, cur});
        }
    }
    return out;
}

namespace detail {

inline bool series_oscillates(std::span<const double> s, double tolerance)
{
    std::size_t reversals = 0;
    int last_sign = 0;
    for (std::size_t k = 1; k < s.size(); ++k) {
        const double d = s[k] - s[k - 1];
        const int sign = (d > 0.0) - (d < 0.0);
        if (sign == 0) continue;
        if (last_sign != 0 && sign != last_sign) ++reversals;
        last_sign = sign;
    }
    if (reversals < 2) return false;
    const std::size_t half = s.size() / 2;
    auto range = [](std::span<const double> r) {
        const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
        return *hi - *lo;
    };
    const double early = range(s.first(half));
    const double late = range(s.subspan(s.size() - half));
    return late > tolerance && late >= 0.5 * early;
}

}  // namespace detail

/*
 * True when the last `window` steps keep reversing direction without
 * settling: at least two reversals of the first difference in some
 * coordinate, whose spread over the second half of the window is above the
 * trace tolerance and has not shrunk below half the spread of the first half.
 * Uses full iterates when recorded, the inf-norm series otherwise.
 */
inline bool detect_oscillation(const IterationTrace& trace, std::size_t window)
{
    if (window < 4) throw std::invalid_argument("detect_oscillation: window must be >= 4");
    const auto& recs = trace.records;
    if (recs.size() < window + 1) return false;
    const std::size_t start = recs.size() - (window + 1);
    const bool full = !recs[start].iterate.empty();
    const std::size_t dims = full ? recs[start].iterate.size() : 1;
    Vector series(window + 1);
    for (std::size_t d = 0; d < dims; ++d) {
        for (std::size_t k = 0; k <= window; ++k) {
            const auto& r = recs[start + k];
            series[k] = full ? r.iterate[d] : r.iterate_inf_norm;
        }
        if (!all_finite(series)) continue;
        if (detail::series_oscillates(series, trace.tolerance)) return true;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

namespace detail {

inline IterationRecord make_record(std::size_t iter, std::span<const double> y, double energy,
                                   std::span<const double> grad, std::size_t cap)
{
    IterationRecord r;
    r.iter = iter;
    if (y.size() <= cap) r.iterate.assign(y.begin(), y.end());
    r.iterate_inf_norm = inf_norm(y);
    r.energy = energy;
    r.grad_inf_norm = grad.empty() ? std::numeric_limits<double>::quiet_NaN() : inf_norm(grad);
    return r;
}

inline bool stop_rule(double e_prev, double e_cur, std::span<const double> y_prev,
                      std::span<const double> y_cur, double tol)
{
    if (std::abs(e_cur - e_prev) <= tol * std::max(1.0, e_prev)) return true;
    double step = 0.0;
    for (std::size_t i = 0; i < y_cur.size(); ++i) {
        step = std::max(step, std::abs(y_cur[i] - y_prev[i]));
    }
    return step <= tol;
}

}  // namespace detail

/*
 * Iterates the configured method from y0 until a stopping rule fires. The
 * trace holds y0 plus every iterate. A non-finite iterate or energy ends the
 * run with stop_reason = nonfinite (the offending record is kept). Runs are
 * deterministic: identical inputs give bitwise-identical traces.
 */
inline IterationTrace run(const SolverConfig& config, const CompositeObjective& objective,
                          std::span<const double> y0)
{
    config.validate();
    const SmoothEnergy& smooth = *objective.smooth;
    const std::size_t n = smooth.dimension();
    if (y0.size() != n) {
        throw std::invalid_argument("run: y0 has length " + std::to_string(y0.size())
                                    + ", problem dimension is " + std::to_string(n));
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(y0[i])) {
            throw DomainError("run: y0 component " + std::to_string(i) + " is not finite",
                              static_cast<std::ptrdiff_t>(i));
        }
    }
    const auto* lsq = dynamic_cast<const LinearInverseProblem*>(&smooth);
    if (config.method != Method::pga) detail::require_non_negative(y0, "run");
    if (config.method == Method::lee_seung && lsq == nullptr) {
        throw std::invalid_argument("run: LEE_SEUNG requires a linear inverse problem");
    }
    if (config.certified && lsq == nullptr) {
        throw std::invalid_argument("run: certified mode requires a linear inverse problem");
    }

    const SlidingSigmoid op(config.alpha);
    IterationTrace trace;
    trace.method = config.method;
    trace.dimension = n;
    trace.tolerance = config.tolerance;
    trace.records.reserve(std::min<std::size_t>(config.max_iters + 1, 1u << 16));

    Vector y(y0.begin(), y0.end());
    Vector g = smooth.gradient(y);
    double e = objective.value(y);
    trace.records.push_back(detail::make_record(0, y, e, g, config.record_dimension_cap));
    if (!std::isfinite(e) || !all_finite(g)) {
        trace.stop_reason = StopReason::nonfinite;
        return trace;
    }

    for (std::size_t t = 1; t <= config.max_iters; ++t) {
        MultiplicativeStep step;
        switch (config.method) {
        case Method::sso_pga:
            if (config.certified && inf_norm(y) > 0.0) {
                const double bound = alpha_upper_bound(*lsq, y);
                if (config.alpha > bound) throw CertificationError(t, config.alpha, bound);
            }
            step = detail::sso_update(y, g, op, config.learning_rate, config.clip, objective.prox);
            break;
        case Method::pga:
            step.next = detail::pga_update(y, g, config.learning_rate, objective.prox);
            step.finite = all_finite(step.next);
            break;
        case Method::lee_seung:
            step.next = lee_seung_step(*lsq, y, config.epsilon);
            step.finite = all_finite(step.next);
            break;
        }

        Vector next = std::move(step.next);
        double e_next = std::numeric_limits<double>::quiet_NaN();
        Vector g_next;
        if (step.finite) {
            e_next = objective.value(next);
            g_next = smooth.gradient(next);
        }
        IterationRecord rec =
            detail::make_record(t, next, e_next, g_next, config.record_dimension_cap);
        if (config.method == Method::sso_pga && std::isfinite(step.mult_min)) {
            rec.mult_min = step.mult_min;
            rec.mult_max = step.mult_max;
        }
        trace.records.push_back(std::move(rec));

        if (!step.finite || !std::isfinite(e_next) || !all_finite(g_next)) {
            trace.stop_reason = StopReason::nonfinite;
            return trace;
        }
        const bool converged = detail::stop_rule(e, e_next, y, next, config.tolerance);
        y = std::move(next);
        g = std::move(g_next);
        e = e_next;
        if (converged) {
            trace.stop_reason = StopReason::converged;
            return trace;
        }
        if (config.oscillation_window > 0 && detect_oscillation(trace, config.oscillation_window)) {
            trace.stop_reason = StopReason::oscillation_detected;
            return trace;
        }
    }
    trace.stop_reason = StopReason::max_iters;
    return trace;
}

inline IterationTrace run(const SolverConfig& config, const LinearInverseProblem& problem,
                          std::span<const double> y0,
                          ProximalTerm prox = ProximalTerm::identity())
{
    return run(config, as_objective(problem, prox), y0);
}

}  // namespace ssopga
