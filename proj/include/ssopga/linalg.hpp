#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sso.hpp"

namespace ssopga {

/// Dense row-major matrix. Also serves as the explicit linear operator type
/// (apply / apply_adjoint) wherever an operator is needed.
class DenseMatrix {
public:
    DenseMatrix() = default;

    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    DenseMatrix(std::size_t rows, std::size_t cols, Vector row_major)
        : rows_(rows), cols_(cols), data_(std::move(row_major))
    {
        if (data_.size() != rows_ * cols_) {
            throw std::invalid_argument("DenseMatrix: data size does not match shape");
        }
    }

    static DenseMatrix identity(std::size_t n)
    {
        DenseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static DenseMatrix diagonal(std::span<const double> d)
    {
        DenseMatrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    /// Builds from nested rows; all rows must share one length.
    static DenseMatrix from_rows(const std::vector<Vector>& rows)
    {
        if (rows.empty()) return {};
        const std::size_t cols = rows.front().size();
        DenseMatrix m(rows.size(), cols);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != cols) {
                throw std::invalid_argument("DenseMatrix: ragged rows (row " + std::to_string(i)
                                            + ")");
            }
            std::copy(rows[i].begin(), rows[i].end(), m.data_.begin() + i * cols);
        }
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<const double> row(std::size_t i) const
    {
        return {data_.data() + i * cols_, cols_};
    }
    std::span<const double> data() const noexcept { return data_; }

    bool all_finite() const noexcept
    {
        return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
    }

    /// A v
    Vector apply(std::span<const double> v) const
    {
        require(v.size() == cols_, "apply", cols_, v.size());
        Vector out(rows_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) {
            const double* r = data_.data() + i * cols_;
            double acc = 0.0;
            for (std::size_t j = 0; j < cols_; ++j) acc += r[j] * v[j];
            out[i] = acc;
        }
        return out;
    }

    /// A^T v
    Vector apply_adjoint(std::span<const double> v) const
    {
        require(v.size() == rows_, "apply_adjoint", rows_, v.size());
        Vector out(cols_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) {
            const double* r = data_.data() + i * cols_;
            const double vi = v[i];
            for (std::size_t j = 0; j < cols_; ++j) out[j] += r[j] * vi;
        }
        return out;
    }

private:
    static void require(bool ok, const char* op, std::size_t want, std::size_t got)
    {
        if (!ok) {
            throw std::invalid_argument(std::string("DenseMatrix::") + op + ": expected length "
                                        + std::to_string(want) + ", got " + std::to_string(got));
        }
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Vector data_;
};

inline double dot(std::span<const double> a, std::span<const double> b)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline double norm2(std::span<const double> a)
{
    return std::sqrt(dot(a, a));
}

inline double squared_norm(std::span<const double> a)
{
    return dot(a, a);
}

/// Max-abs norm. NaN components propagate.
inline double inf_norm(std::span<const double> a)
{
    double m = 0.0;
    for (double v : a) {
        if (std::isnan(v)) return v;
        m = std::max(m, std::abs(v));
    }
    return m;
}

inline bool all_finite(std::span<const double> a)
{
    return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

/// a - b
inline Vector subtract(std::span<const double> a, std::span<const double> b)
{
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

/// Uniform double in [0, 1) from the top 53 bits; identical across standard
/// library implementations, unlike std::uniform_real_distribution.
inline double unit_uniform(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi)
{
    return lo + (hi - lo) * unit_uniform(rng);
}

struct PowerIterationOptions {
    std::uint64_t seed = 42;
    double tolerance = 1e-10;  // relative change of the Rayleigh quotient
    std::size_t max_iters = 10000;
};

/// Largest singular value of H by power iteration on H^T H.
inline double spectral_norm(const DenseMatrix& H, const PowerIterationOptions& opts = {})
{
    if (H.empty()) {
        throw std::invalid_argument("spectral_norm: empty matrix");
    }
    if (!H.all_finite()) {
        throw DomainError("spectral_norm: non-finite matrix entry");
    }
    std::mt19937_64 rng(opts.seed);
    Vector v(H.cols());
    for (double& e : v) e = 0.5 + unit_uniform(rng);
    double nv = norm2(v);
    for (double& e : v) e /= nv;

    double lambda = 0.0;
    for (std::size_t it = 0; it < opts.max_iters; ++it) {
        Vector w = H.apply_adjoint(H.apply(v));
        const double next = dot(v, w);  // Rayleigh quotient, v is unit
        const double nw = norm2(w);
        if (nw == 0.0) {
            // v lies in the null space; a zero matrix ends here
            return 0.0;
        }
        for (std::size_t i = 0; i < w.size(); ++i) v[i] = w[i] / nw;
        if (it > 0 && std::abs(next - lambda) <= opts.tolerance * std::abs(next)) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    // One more quotient with the final unit vector; exact on convergence.
    const Vector hv = H.apply(v);
    lambda = std::max(lambda, squared_norm(hv));
    return std::sqrt(lambda);
}

}  // namespace ssopga
