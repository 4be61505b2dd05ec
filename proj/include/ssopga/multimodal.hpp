#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>

#include "linalg.hpp"
#include "objectives.hpp"
#include "solvers.hpp"
#include "sso.hpp"

namespace ssopga {

/*
 * Two-variable restoration model
 *
 *     ||X - K H||^2 + beta ||Y - S T||^2 + gamma ||T - f(H)||^2 + phi(H)
 *
 * with H the target and T its guide-aligned embedding. K, S and the
 * coupling f are explicit linear maps; f* is the adjoint of f, so the block
 * gradients below are exact. phi is represented by its proximal map only
 * (identity or soft threshold).
 */
struct MultiModalModel {
    DenseMatrix K;  // H-space -> X-space
    DenseMatrix S;  // T-space -> Y-space
    DenseMatrix F;  // f: H-space -> T-space
    Vector X;
    Vector Y;
    double beta = 1.0;
    double gamma = 1.0;
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    ProximalTerm prox_phi = ProximalTerm::identity();

    std::size_t h_dim() const noexcept { return K.cols(); }
    std::size_t t_dim() const noexcept { return S.cols(); }

    void validate() const
    {
        auto fail = [](const std::string& m) { throw std::invalid_argument("MultiModalModel: " + m); };
        if (K.empty() || S.empty() || F.empty()) fail("operators must be non-empty");
        if (K.rows() != X.size()) fail("K rows must match X length");
        if (S.rows() != Y.size()) fail("S rows must match Y length");
        if (F.cols() != K.cols()) fail("f must act on the target space (F cols == K cols)");
        if (F.rows() != S.cols()) fail("f must map into the embedding space (F rows == S cols)");
        if (!(beta >= 0.0) || !(gamma >= 0.0)) fail("beta and gamma must be >= 0");
        if (!(alpha1 >= 0.0) || !(alpha2 >= 0.0)) fail("alpha1 and alpha2 must be >= 0");
    }
};

namespace detail {

inline void check_shapes(const MultiModalModel& m, std::span<const double> H,
                         std::span<const double> T)
{
    if (H.size() != m.h_dim() || T.size() != m.t_dim()) {
        throw std::invalid_argument("multimodal: H/T length does not match the model ("
                                    + std::to_string(H.size()) + "/" + std::to_string(T.size())
                                    + " vs " + std::to_string(m.h_dim()) + "/"
                                    + std::to_string(m.t_dim()) + ")");
    }
}

// Evaluated exactly as LinearInverseProblem does, so gamma = 0 reproduces a
// standalone solve bit for bit.
inline double data_term(const DenseMatrix& A, std::span<const double> v,
                        std::span<const double> target)
{
    return squared_norm(subtract(A.apply(v), target));
}

inline Vector data_gradient(const DenseMatrix& A, std::span<const double> v,
                            std::span<const double> target)
{
    Vector g = A.apply_adjoint(subtract(A.apply(v), target));
    for (double& e : g) e *= 2.0;
    return g;
}

/// ||X - K H||^2 + gamma ||T - f(H)||^2
inline double h_block_energy(const MultiModalModel& m, std::span<const double> H,
                             std::span<const double> T)
{
    double e = data_term(m.K, H, m.X);
    if (m.gamma != 0.0) e += m.gamma * squared_norm(subtract(T, m.F.apply(H)));
    return e;
}

/// beta ||Y - S T||^2 + gamma ||T - f(H)||^2
inline double t_block_energy(const MultiModalModel& m, std::span<const double> H,
                             std::span<const double> T)
{
    double e = m.beta * data_term(m.S, T, m.Y);
    if (m.gamma != 0.0) e += m.gamma * squared_norm(subtract(T, m.F.apply(H)));
    return e;
}

}  // namespace detail

/// Sum of the quadratic terms only.
inline double smooth_objective_value(const MultiModalModel& m, std::span<const double> H,
                                     std::span<const double> T)
{
    detail::check_shapes(m, H, T);
    double e = detail::data_term(m.K, H, m.X);
    e += m.beta * detail::data_term(m.S, T, m.Y);
    e += m.gamma * squared_norm(subtract(T, m.F.apply(H)));
    return e;
}

/// The three quadratic terms plus phi(H) as reported by the prox stand-in
/// (0 for identity, lambda ||H||_1 for soft threshold).
inline double total_objective(const MultiModalModel& m, std::span<const double> H,
                              std::span<const double> T)
{
    return smooth_objective_value(m, H, T) + m.prox_phi.value(H);
}

/// 2 K^T (K H - X) + 2 gamma f*(f(H) - T)
inline Vector grad_H(const MultiModalModel& m, std::span<const double> H,
                     std::span<const double> T)
{
    detail::check_shapes(m, H, T);
    Vector g = detail::data_gradient(m.K, H, m.X);
    if (m.gamma != 0.0) {
        const Vector c = m.F.apply_adjoint(subtract(m.F.apply(H), T));
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += 2.0 * m.gamma * c[i];
    }
    return g;
}

/// 2 beta S^T (S T - Y) + 2 gamma (T - f(H)); H is the freshly updated target.
inline Vector grad_T(const MultiModalModel& m, std::span<const double> H,
                     std::span<const double> T)
{
    detail::check_shapes(m, H, T);
    Vector g = detail::data_gradient(m.S, T, m.Y);
    for (double& e : g) e *= m.beta;
    if (m.gamma != 0.0) {
        const Vector fh = m.F.apply(H);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += 2.0 * m.gamma * (T[i] - fh[i]);
    }
    return g;
}

/// prox_phi(H .* SSO_alpha1(grad_H(H, T)))
inline MultiplicativeStep update_H_detailed(const MultiModalModel& m, std::span<const double> H,
                                            std::span<const double> T)
{
    detail::require_non_negative(H, "update_H");
    detail::require_non_negative(T, "update_H");
    const Vector g = grad_H(m, H, T);
    return detail::sso_update(H, g, SlidingSigmoid(m.alpha1), 1.0, std::nullopt, m.prox_phi);
}

/// T .* SSO_alpha2(grad_T(H_new, T)); no proximal map on the embedding.
inline MultiplicativeStep update_T_detailed(const MultiModalModel& m,
                                            std::span<const double> H_new,
                                            std::span<const double> T)
{
    detail::require_non_negative(H_new, "update_T");
    detail::require_non_negative(T, "update_T");
    const Vector g = grad_T(m, H_new, T);
    return detail::sso_update(T, g, SlidingSigmoid(m.alpha2), 1.0, std::nullopt,
                              ProximalTerm::identity());
}

inline Vector update_H(const MultiModalModel& m, std::span<const double> H,
                       std::span<const double> T)
{
    return update_H_detailed(m, H, T).next;
}

inline Vector update_T(const MultiModalModel& m, std::span<const double> H_new,
                       std::span<const double> T)
{
    return update_T_detailed(m, H_new, T).next;
}

/// Per-block descent bounds 2 / (kappa ||A||^2) - 1, treating the H block as
/// the inverse problem with operator [K; sqrt(gamma) F] and the T block with
/// [sqrt(beta) S; sqrt(gamma) I]. +inf for an all-zero block.
inline std::pair<double, double> block_alpha_bounds(const MultiModalModel& m,
                                                    std::span<const double> H,
                                                    std::span<const double> T)
{
    detail::check_shapes(m, H, T);
    auto stack = [](const DenseMatrix& top, double wt, const DenseMatrix& bottom, double wb) {
        DenseMatrix out(top.rows() + bottom.rows(), top.cols());
        for (std::size_t i = 0; i < top.rows(); ++i)
            for (std::size_t j = 0; j < top.cols(); ++j) out(i, j) = wt * top(i, j);
        for (std::size_t i = 0; i < bottom.rows(); ++i)
            for (std::size_t j = 0; j < bottom.cols(); ++j)
                out(top.rows() + i, j) = wb * bottom(i, j);
        return out;
    };
    const double sg = std::sqrt(m.gamma);
    const double nh = spectral_norm(stack(m.K, 1.0, m.F, sg));
    const double nt =
        spectral_norm(stack(m.S, std::sqrt(m.beta), DenseMatrix::identity(m.t_dim()), sg));
    auto bound = [](double kappa, double norm) {
        if (kappa == 0.0) return std::numeric_limits<double>::infinity();
        return 2.0 / (kappa * norm * norm) - 1.0;
    };
    return {bound(inf_norm(H), nh), bound(inf_norm(T), nt)};
}

struct MultiModalResult {
    IterationTrace h_trace;  // energy column: the H-block energy
    IterationTrace t_trace;  // energy column: the T-block energy
    Vector objective;        // total_objective per iteration, starting at the initial state
    StopReason stop_reason = StopReason::max_iters;
    Vector H;
    Vector T;
};

/*
 * Alternates update_H then update_T (with the new H). Stops on the same
 * rules as run(), applied to the total objective and to the larger of the
 * two iterate changes. max_iters = 0 returns the initial state only.
 */
inline MultiModalResult solve_multimodal(const MultiModalModel& m, std::span<const double> H0,
                                         std::span<const double> T0, std::size_t max_iters,
                                         double tolerance,
                                         std::size_t record_dimension_cap = 64)
{
    m.validate();
    detail::check_shapes(m, H0, T0);
    if (!(tolerance > 0.0)) throw std::invalid_argument("solve_multimodal: tolerance must be > 0");
    if (!all_finite(H0) || !all_finite(T0)) {
        throw DomainError("solve_multimodal: non-finite initial state");
    }
    detail::require_non_negative(H0, "solve_multimodal");
    detail::require_non_negative(T0, "solve_multimodal");

    MultiModalResult res;
    res.H.assign(H0.begin(), H0.end());
    res.T.assign(T0.begin(), T0.end());
    for (IterationTrace* tr : {&res.h_trace, &res.t_trace}) {
        tr->method = Method::sso_pga;
        tr->tolerance = tolerance;
    }
    res.h_trace.dimension = m.h_dim();
    res.t_trace.dimension = m.t_dim();

    auto h_energy = [&](const Vector& H, const Vector& T) {
        return detail::h_block_energy(m, H, T) + m.prox_phi.value(H);
    };
    auto record = [&](std::size_t t, const Vector& H, const Vector& T,
                      const MultiplicativeStep* sh, const MultiplicativeStep* st) {
        const bool ok = all_finite(H) && all_finite(T);
        const Vector gh = ok ? grad_H(m, H, T) : Vector{};
        const Vector gt = ok ? grad_T(m, H, T) : Vector{};
        const double nan = std::numeric_limits<double>::quiet_NaN();
        IterationRecord rh = detail::make_record(t, H, ok ? h_energy(H, T) : nan, gh,
                                                 record_dimension_cap);
        IterationRecord rt = detail::make_record(
            t, T, ok ? detail::t_block_energy(m, H, T) : nan, gt, record_dimension_cap);
        if (sh && std::isfinite(sh->mult_min)) {
            rh.mult_min = sh->mult_min;
            rh.mult_max = sh->mult_max;
        }
        if (st && std::isfinite(st->mult_min)) {
            rt.mult_min = st->mult_min;
            rt.mult_max = st->mult_max;
        }
        res.h_trace.records.push_back(std::move(rh));
        res.t_trace.records.push_back(std::move(rt));
        res.objective.push_back(ok ? total_objective(m, H, T) : nan);
    };

    record(0, res.H, res.T, nullptr, nullptr);
    if (!std::isfinite(res.objective.back())) {
        res.stop_reason = StopReason::nonfinite;
    }

    for (std::size_t t = 1; t <= max_iters && res.stop_reason != StopReason::nonfinite; ++t) {
        MultiplicativeStep sh = update_H_detailed(m, res.H, res.T);
        MultiplicativeStep st;
        if (sh.finite) {
            st = update_T_detailed(m, sh.next, res.T);
        } else {
            st.next.assign(res.T.size(), std::numeric_limits<double>::quiet_NaN());
            st.finite = false;
        }
        record(t, sh.next, st.next, &sh, &st);
        const double prev = res.objective[res.objective.size() - 2];
        const double cur = res.objective.back();
        if (!sh.finite || !st.finite || !std::isfinite(cur)) {
            res.stop_reason = StopReason::nonfinite;
            res.H = std::move(sh.next);
            res.T = std::move(st.next);
            break;
        }
        double step = 0.0;
        for (std::size_t i = 0; i < res.H.size(); ++i)
            step = std::max(step, std::abs(sh.next[i] - res.H[i]));
        for (std::size_t i = 0; i < res.T.size(); ++i)
            step = std::max(step, std::abs(st.next[i] - res.T[i]));
        res.H = std::move(sh.next);
        res.T = std::move(st.next);
        if (std::abs(cur - prev) <= tolerance * std::max(1.0, prev) || step <= tolerance) {
            res.stop_reason = StopReason::converged;
            break;
        }
    }
    res.h_trace.stop_reason = res.stop_reason;
    res.t_trace.stop_reason = res.stop_reason;
    return res;
}

/// The H trace with the total objective in its energy column.
inline IterationTrace objective_trace(const MultiModalResult& r)
{
    IterationTrace h = r.h_trace;
    for (std::size_t k = 0; k < h.records.size(); ++k) h.records[k].energy = r.objective[k];
    return h;
}

struct MultiModalInstance {
    MultiModalModel model;
    Vector H_true;
    Vector T_true;
};

/*
 * Consistent toy instance built by forward simulation: X = K H*, T* = f(H*),
 * Y = S T*, so the objective attains 0. Operators are diagonally dominant
 * non-negative matrices scaled so that both block bounds stay positive for
 * iterates with inf-norm up to about 1.
 */
inline MultiModalInstance make_consistent_multimodal(std::size_t dim, std::uint64_t seed,
                                                     double gamma = 0.5, double beta = 1.0,
                                                     double alpha = 0.25)
{
    std::mt19937_64 rng(seed);
    auto make_op = [&](double target_norm) {
        DenseMatrix A(dim, dim);
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = 0; j < dim; ++j)
                A(i, j) = (i == j ? 1.0 : 0.0) + 0.2 * unit_uniform(rng) / static_cast<double>(dim);
        const double s = target_norm / spectral_norm(A);
        DenseMatrix B(dim, dim);
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = 0; j < dim; ++j) B(i, j) = s * A(i, j);
        return B;
    };
    MultiModalInstance inst;
    MultiModalModel& m = inst.model;
    m.K = make_op(0.8);
    m.F = make_op(0.8);
    m.S = make_op(0.8);
    m.beta = beta;
    m.gamma = gamma;
    m.alpha1 = alpha;
    m.alpha2 = alpha;
    inst.H_true.resize(dim);
    for (double& v : inst.H_true) v = uniform(rng, 0.2, 1.0);
    m.X = m.K.apply(inst.H_true);
    inst.T_true = m.F.apply(inst.H_true);
    m.Y = m.S.apply(inst.T_true);
    return inst;
}

}  // namespace ssopga
