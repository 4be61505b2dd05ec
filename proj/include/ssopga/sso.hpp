#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ssopga {

using Vector = std::vector<double>;

/// Raised when an input lies outside the mathematical domain of an operation
/// (non-finite values, negative iterates for multiplicative updates, ...).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what, std::ptrdiff_t index = -1)
        : std::domain_error(what), index_(index) {}

    /// Offending component, or -1 when the error is not tied to one.
    std::ptrdiff_t index() const noexcept { return index_; }

private:
    std::ptrdiff_t index_;
};

/// Logistic function. Only ever exponentiates a non-positive argument, so it
/// never overflows.
inline double sigmoid(double u) noexcept
{
    if (u >= 0.0) {
        return 1.0 / (1.0 + std::exp(-u));
    }
    const double e = std::exp(u);
    return e / (1.0 + e);
}

/// sigma'(u) = sigma(u) * sigma(-u), in (0, 1/4].
inline double sigmoid_slope(double u) noexcept
{
    return sigmoid(u) * sigmoid(-u);
}

/// Equivalent additive step of one multiplicative update: for the coordinate
/// y_i with gradient z, y_i * SSO(z) == y_i - rho * z.
struct StepEquivalence {
    double theta;
    double rho;
};

/*
 * Sliding Sigmoid Operator
 *
 *     SSO_a(z) = 2 sigma(-z - a) + 2 sigma(a) - 1,   a >= 0
 *
 * A bounded, strictly decreasing multiplier through (0, 1). Used as
 * y <- y * SSO_a(grad) it moves y against the gradient and can never flip
 * its sign. Internally evaluated as 1 + 2 (sigma(-z - a) - sigma(-a)),
 * which is the same function but returns exactly 1 at z = 0.
 */
class SlidingSigmoid {
public:
    /// Above this, sigma(alpha) == 1 in double precision.
    static constexpr double alpha_cap = 700.0;

    explicit SlidingSigmoid(double alpha = 0.0) : alpha_(alpha)
    {
        if (!(alpha >= 0.0) || std::isnan(alpha)) {
            throw std::invalid_argument("SlidingSigmoid: alpha must be >= 0, got "
                                        + std::to_string(alpha));
        }
        shift_ = sigmoid(-std::min(alpha_, alpha_cap));
    }

    double alpha() const noexcept { return alpha_; }

    double operator()(double z) const
    {
        if (!std::isfinite(z)) {
            throw DomainError("sso_apply: non-finite input");
        }
        return evaluate(z);
    }

    /// Open interval (2 sigma(a) - 1, 2 sigma(a) + 1) containing every output.
    std::pair<double, double> bounds() const noexcept
    {
        return {1.0 + 2.0 * (0.0 - shift_), 1.0 + 2.0 * (1.0 - shift_)};
    }

    /// d/dz SSO_a(z) = -2 sigma'(-z - a); magnitude at most 1/2.
    double derivative(double z) const noexcept
    {
        return -2.0 * sigmoid_slope(-z - alpha_);
    }

    /// theta with SSO_a(z) = 1 - theta * z. Always in (0, 1/2]; at z = 0 it
    /// is the limit 2 sigma'(-a).
    double theta(double z) const noexcept
    {
        if (z == 0.0) {
            return 2.0 * sigmoid_slope(-alpha_);
        }
        if (std::abs(z) < 1.0 && alpha_ < alpha_cap) {
            // sigma(a) - sigma(b) = sinh((a - b)/2) / (2 cosh(a/2) cosh(b/2)),
            // free of the cancellation in (1 - SSO(z)) / z for small z.
            return std::sinh(0.5 * z)
                   / (z * std::cosh(0.5 * alpha_) * std::cosh(0.5 * (z + alpha_)));
        }
        return 2.0 * (shift_ - sigmoid(-z - alpha_)) / z;
    }

    double eta() const noexcept { return 0.5 * (1.0 + alpha_); }

private:
    double evaluate(double z) const noexcept
    {
        return 1.0 + 2.0 * (sigmoid(-z - alpha_) - shift_);
    }

    double alpha_;
    double shift_;  // sigma(-alpha)
};

inline double sso_apply(const SlidingSigmoid& op, double z)
{
    return op(z);
}

inline Vector sso_apply_elementwise(const SlidingSigmoid& op, std::span<const double> g)
{
    Vector out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!std::isfinite(g[i])) {
            throw DomainError("sso_apply_elementwise: non-finite component at index "
                                  + std::to_string(i),
                              static_cast<std::ptrdiff_t>(i));
        }
        out[i] = op(g[i]);
    }
    return out;
}

inline std::pair<double, double> sso_bounds(const SlidingSigmoid& op) noexcept
{
    return op.bounds();
}

inline double sso_derivative(const SlidingSigmoid& op, double z) noexcept
{
    return op.derivative(z);
}

inline double equivalent_theta(const SlidingSigmoid& op, double z) noexcept
{
    return op.theta(z);
}

inline StepEquivalence equivalent_step_size(const SlidingSigmoid& op, double y_i, double z)
{
    if (!(y_i >= 0.0)) {
        throw DomainError("equivalent_step_size: y_i must be non-negative");
    }
    const double theta = op.theta(z);
    return {theta, y_i * theta};
}

/// eta(a) |z| - |SSO_a(z) - 1|; non-negative everywhere.
inline double lemma1_slack(const SlidingSigmoid& op, double z)
{
    return op.eta() * std::abs(z) - std::abs(op(z) - 1.0);
}

}  // namespace ssopga
