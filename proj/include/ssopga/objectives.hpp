#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "linalg.hpp"
#include "sso.hpp"

namespace ssopga {

/// Differentiable part E of a composite objective.
class SmoothEnergy {
public:
    virtual ~SmoothEnergy() = default;

    virtual std::size_t dimension() const = 0;
    virtual double energy(std::span<const double> y) const = 0;
    virtual Vector gradient(std::span<const double> y) const = 0;

protected:
    void check_dimension(std::span<const double> y, const char* who) const
    {
        if (y.size() != dimension()) {
            throw std::invalid_argument(std::string(who) + ": expected dimension "
                                        + std::to_string(dimension()) + ", got "
                                        + std::to_string(y.size()));
        }
    }
};

/// sign(v_i) * max(|v_i| - tau, 0), the exact minimizer of
/// 0.5 ||z - v||^2 + tau ||z||_1.
inline Vector soft_threshold(std::span<const double> v, double tau)
{
    if (!(tau >= 0.0)) {
        throw std::invalid_argument("soft_threshold: tau must be >= 0");
    }
    Vector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double mag = std::abs(v[i]) - tau;
        out[i] = mag > 0.0 ? std::copysign(mag, v[i]) : 0.0;
    }
    return out;
}

/// Per-coordinate thresholds.
inline Vector soft_threshold(std::span<const double> v, std::span<const double> tau)
{
    if (tau.size() != v.size()) {
        throw std::invalid_argument("soft_threshold: threshold length mismatch");
    }
    Vector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(tau[i] >= 0.0)) {
            throw std::invalid_argument("soft_threshold: tau must be >= 0");
        }
        const double mag = std::abs(v[i]) - tau[i];
        out[i] = mag > 0.0 ? std::copysign(mag, v[i]) : 0.0;
    }
    return out;
}

/// Non-smooth term lambda * f(y): either absent (identity prox) or the l1 norm.
/// `prox` takes the final threshold tau, i.e. the caller folds the step size
/// and lambda together.
class ProximalTerm {
public:
    enum class Kind { identity, l1 };

    static ProximalTerm identity() { return ProximalTerm(Kind::identity, 0.0); }

    static ProximalTerm l1(double weight)
    {
        if (!(weight >= 0.0)) {
            throw std::invalid_argument("ProximalTerm::l1: weight must be >= 0");
        }
        return ProximalTerm(Kind::l1, weight);
    }

    Kind kind() const noexcept { return kind_; }
    double weight() const noexcept { return weight_; }
    bool is_identity() const noexcept { return kind_ == Kind::identity || weight_ == 0.0; }

    /// lambda * f(y)
    double value(std::span<const double> y) const
    {
        if (is_identity()) return 0.0;
        double s = 0.0;
        for (double v : y) s += std::abs(v);
        return weight_ * s;
    }

    Vector prox(std::span<const double> v, double tau) const
    {
        if (kind_ == Kind::identity) return Vector(v.begin(), v.end());
        return soft_threshold(v, tau);
    }

    Vector prox(std::span<const double> v, std::span<const double> tau) const
    {
        if (kind_ == Kind::identity) return Vector(v.begin(), v.end());
        return soft_threshold(v, tau);
    }

private:
    ProximalTerm(Kind k, double w) : kind_(k), weight_(w) {}

    Kind kind_;
    double weight_;
};

/*
 * E(y) = ||x - H y||^2 for a dense H (n x m) and observation x (length n).
 * The spectral norm of H is computed on first use and cached; instances are
 * immutable otherwise and safe to share between threads.
 */
class LinearInverseProblem final : public SmoothEnergy {
public:
    LinearInverseProblem(DenseMatrix H, Vector x)
        : H_(std::move(H)), x_(std::move(x)), cache_(std::make_shared<NormCache>())
    {
        if (H_.rows() == 0 || H_.cols() == 0) {
            throw std::invalid_argument("LinearInverseProblem: H must be non-empty");
        }
        if (x_.size() != H_.rows()) {
            throw std::invalid_argument("LinearInverseProblem: x has length "
                                        + std::to_string(x_.size()) + " but H has "
                                        + std::to_string(H_.rows()) + " rows");
        }
        if (!H_.all_finite() || !all_finite(x_)) {
            throw DomainError("LinearInverseProblem: non-finite entry");
        }
    }

    const DenseMatrix& H() const noexcept { return H_; }
    const Vector& x() const noexcept { return x_; }
    std::size_t rows() const noexcept { return H_.rows(); }
    std::size_t dimension() const override { return H_.cols(); }

    Vector residual(std::span<const double> y) const
    {
        check_dimension(y, "LinearInverseProblem");
        return subtract(H_.apply(y), x_);
    }

    double energy(std::span<const double> y) const override
    {
        return squared_norm(residual(y));
    }

    /// 2 H^T (H y - x)
    Vector gradient(std::span<const double> y) const override
    {
        Vector g = H_.apply_adjoint(residual(y));
        for (double& v : g) v *= 2.0;
        return g;
    }

    double spectral_norm() const
    {
        std::call_once(cache_->once, [this] { cache_->value = ssopga::spectral_norm(H_); });
        return cache_->value;
    }

private:
    struct NormCache {
        std::once_flag once;
        double value = 0.0;
    };

    DenseMatrix H_;
    Vector x_;
    std::shared_ptr<NormCache> cache_;
};

inline double lsq_energy(const LinearInverseProblem& p, std::span<const double> y)
{
    return p.energy(y);
}

inline Vector lsq_gradient(const LinearInverseProblem& p, std::span<const double> y)
{
    return p.gradient(y);
}

/// L = 2 ||H||_2^2, the Lipschitz constant of the least-squares gradient.
inline double lipschitz_constant(const LinearInverseProblem& p)
{
    const double s = p.spectral_norm();
    return 2.0 * s * s;
}

/// 2 / (kappa ||H||^2) - 1 with kappa = ||y||_inf: the largest alpha for which
/// one multiplicative step from y is guaranteed not to increase E. Negative
/// means no alpha >= 0 qualifies at this state.
inline double alpha_upper_bound(const LinearInverseProblem& p, std::span<const double> y)
{
    if (y.size() != p.dimension()) {
        throw std::invalid_argument("alpha_upper_bound: dimension mismatch");
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!std::isfinite(y[i]) || y[i] < 0.0) {
            throw DomainError("alpha_upper_bound: y must be finite and non-negative",
                              static_cast<std::ptrdiff_t>(i));
        }
    }
    const double kappa = inf_norm(y);
    if (kappa == 0.0) {
        throw DomainError("alpha_upper_bound: y is the zero vector");
    }
    const double s = p.spectral_norm();
    return 2.0 / (kappa * s * s) - 1.0;
}

// ---------------------------------------------------------------------------
// Scalar benchmarks
// ---------------------------------------------------------------------------

enum class ScalarProblemId { I, II, I_plus, II_plus };

inline ScalarProblemId parse_scalar_problem(std::string_view id)
{
    if (id == "I") return ScalarProblemId::I;
    if (id == "II") return ScalarProblemId::II;
    if (id == "I+" || id == "I_plus") return ScalarProblemId::I_plus;
    if (id == "II+" || id == "II_plus") return ScalarProblemId::II_plus;
    throw std::invalid_argument("unknown scalar benchmark '" + std::string(id)
                                + "' (expected I, II, I+ or II+)");
}

inline std::string to_string(ScalarProblemId id)
{
    switch (id) {
    case ScalarProblemId::I: return "I";
    case ScalarProblemId::II: return "II";
    case ScalarProblemId::I_plus: return "I+";
    case ScalarProblemId::II_plus: return "II+";
    }
    return "?";
}

/// (y - c)^2, optionally plus sin(4(y - c)) + cos(2(y - c)) (non-convex).
class ScalarEnergy final : public SmoothEnergy {
public:
    explicit ScalarEnergy(double center, bool trigonometric = false)
        : center_(center), trig_(trigonometric) {}

    double center() const noexcept { return center_; }
    bool trigonometric() const noexcept { return trig_; }

    std::size_t dimension() const override { return 1; }

    double energy(std::span<const double> y) const override
    {
        check_dimension(y, "ScalarEnergy");
        const double d = y[0] - center_;
        double e = d * d;
        if (trig_) e += std::sin(4.0 * d) + std::cos(2.0 * d);
        return e;
    }

    Vector gradient(std::span<const double> y) const override
    {
        check_dimension(y, "ScalarEnergy");
        const double d = y[0] - center_;
        double g = 2.0 * d;
        if (trig_) g += 4.0 * std::cos(4.0 * d) - 2.0 * std::sin(2.0 * d);
        return {g};
    }

private:
    double center_;
    bool trig_;
};

/// Smooth energy plus optional non-smooth term.
struct CompositeObjective {
    std::shared_ptr<const SmoothEnergy> smooth;
    ProximalTerm prox = ProximalTerm::identity();
    std::string label;

    std::size_t dimension() const { return smooth->dimension(); }

    /// E(y) + lambda f(y)
    double value(std::span<const double> y) const
    {
        return smooth->energy(y) + prox.value(y);
    }
};

/// Problem I:  (y - 0.5)^2
/// Problem II: (y - 0.5)^2 + 0.5 |y|
/// I+ / II+ add sin(4(y - 0.5)) + cos(2(y - 0.5)).
inline CompositeObjective make_scalar_benchmark(ScalarProblemId id)
{
    const bool trig = id == ScalarProblemId::I_plus || id == ScalarProblemId::II_plus;
    const bool l1 = id == ScalarProblemId::II || id == ScalarProblemId::II_plus;
    return {std::make_shared<ScalarEnergy>(0.5, trig),
            l1 ? ProximalTerm::l1(0.5) : ProximalTerm::identity(), to_string(id)};
}

inline CompositeObjective make_scalar_benchmark(std::string_view id)
{
    return make_scalar_benchmark(parse_scalar_problem(id));
}

/// Global minimizers. I/II are analytic; I+/II+ come from a grid search on
/// [-2, 3] at resolution 1e-6.
inline double scalar_benchmark_minimizer(ScalarProblemId id)
{
    switch (id) {
    case ScalarProblemId::I: return 0.5;
    case ScalarProblemId::II: return 0.25;
    case ScalarProblemId::I_plus: return 1.632384;
    case ScalarProblemId::II_plus: return 0.032824;
    }
    return 0.0;
}

/// Treats a LinearInverseProblem as a composite objective.
inline CompositeObjective as_objective(LinearInverseProblem p,
                                       ProximalTerm prox = ProximalTerm::identity(),
                                       std::string label = "lsq")
{
    return {std::make_shared<LinearInverseProblem>(std::move(p)), prox, std::move(label)};
}

}  // namespace ssopga
