#pragma once

// Spherical-harmonic bookkeeping on S^{d-1} and on products of patch spheres:
// dimension counts, d-dimensional Legendre polynomials, Gram matrices built
// through the addition theorem, and uniform sampling.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kcurve/error.hpp"
#include "kcurve/random.hpp"

namespace kcurve {

enum class GeometryKind { Full, Patched };

/// Input space: the full sphere S^{d-1}, or p patch spheres S^{d0-1} with d = p*d0.
/// A Full geometry is stored as a single patch (d0 = d, p = 1).
class Geometry {
public:
    static Geometry full(int d) {
        if (d < 2) throw ArgumentError("Full geometry needs d >= 2, got " + std::to_string(d));
        return Geometry(GeometryKind::Full, d, 1);
    }

    static Geometry patched(int d0, int p) {
        if (d0 < 2) throw ArgumentError("Patched geometry needs d0 >= 2, got " + std::to_string(d0));
        if (p < 1) throw ArgumentError("Patched geometry needs p >= 1, got " + std::to_string(p));
        return Geometry(GeometryKind::Patched, d0, p);
    }

    GeometryKind kind() const noexcept { return kind_; }
    int dim() const noexcept { return d0_ * p_; }
    int patch_dim() const noexcept { return d0_; }
    int patches() const noexcept { return p_; }

    std::string describe() const {
        if (kind_ == GeometryKind::Full) return "full(d=" + std::to_string(d0_) + ")";
        return "patched(d0=" + std::to_string(d0_) + ",p=" + std::to_string(p_) + ")";
    }

    friend bool operator==(const Geometry&, const Geometry&) = default;

private:
    Geometry(GeometryKind kind, int d0, int p) : kind_(kind), d0_(d0), p_(p) {}

    GeometryKind kind_;
    int d0_;
    int p_;
};

/// m points on the geometry, one per row.
struct Dataset {
    Geometry geometry;
    Eigen::MatrixXd x;
    std::uint64_t seed = 0;

    Eigen::Index size() const noexcept { return x.rows(); }
};

namespace detail {

using u128 = unsigned __int128;

inline u128 binomial(std::int64_t n, std::int64_t r) {
    if (r < 0 || n < r) return 0;
    r = std::min(r, n - r);
    u128 c = 1;
    for (std::int64_t i = 0; i < r; ++i) {
        const u128 num = static_cast<u128>(n - i);
        if (c > std::numeric_limits<u128>::max() / num)
            throw std::overflow_error("binomial coefficient overflows 128 bits");
        // c * (n - i) is divisible by (i + 1) at every step.
        c = c * num / static_cast<u128>(i + 1);
    }
    return c;
}

}  // namespace detail

/// Number of linearly independent degree-k spherical harmonics on the geometry:
/// N(d,k) = C(d+k-1,k) - C(d+k-3,k-2) on S^{d-1}, and p*N(d0,k) on patches.
inline std::uint64_t harmonic_dim(const Geometry& g, int k) {
    if (k < 1) throw ArgumentError("harmonic_dim needs degree k >= 1, got " + std::to_string(k));
    const std::int64_t d = g.patch_dim();
    const detail::u128 n = detail::binomial(d + k - 1, k) - detail::binomial(d + k - 3, k - 2);
    const detail::u128 total = n * static_cast<detail::u128>(g.patches());
    if (total / static_cast<detail::u128>(g.patches()) != n ||
        total > std::numeric_limits<std::uint64_t>::max())
        throw std::overflow_error("harmonic dimension exceeds 64 bits");
    return static_cast<std::uint64_t>(total);
}

/// Sum of harmonic_dim over degrees 1..r.
inline std::uint64_t harmonic_dim_upto(const Geometry& g, int r) {
    std::uint64_t total = 0;
    for (int k = 1; k <= r; ++k) {
        const std::uint64_t n = harmonic_dim(g, k);
        if (total > std::numeric_limits<std::uint64_t>::max() - n)
            throw std::overflow_error("cumulative harmonic dimension exceeds 64 bits");
        total += n;
    }
    return total;
}

/// Legendre polynomial in d dimensions, normalized so that P_k(1) = 1.
/// Forward Gegenbauer recurrence (k+d-2) P_{k+1} = (2k+d-2) t P_k - k P_{k-1}.
inline double legendre(int d, int k, double t) {
    if (k < 0) throw ArgumentError("legendre needs degree k >= 0, got " + std::to_string(k));
    if (d < 2) throw ArgumentError("legendre needs d >= 2, got " + std::to_string(d));
    t = std::clamp(t, -1.0, 1.0);
    if (k == 0) return 1.0;
    double prev = 1.0, cur = t;
    for (int j = 1; j < k; ++j) {
        const double next = ((2.0 * j + d - 2) * t * cur - j * prev) / (j + d - 2);
        prev = cur;
        cur = next;
    }
    return cur;
}

inline std::vector<double> legendre(int d, int k, std::span<const double> ts) {
    std::vector<double> out(ts.size());
    std::transform(ts.begin(), ts.end(), out.begin(), [&](double t) { return legendre(d, k, t); });
    return out;
}

/// Sum_k coeffs[k] * P_k(t), coeffs indexed by degree starting at 0.
inline double legendre_series(int d, std::span<const double> coeffs, double t) {
    t = std::clamp(t, -1.0, 1.0);
    if (coeffs.empty()) return 0.0;
    double sum = coeffs[0];
    if (coeffs.size() == 1) return sum;
    double prev = 1.0, cur = t;
    sum += coeffs[1] * cur;
    for (std::size_t j = 1; j + 1 < coeffs.size(); ++j) {
        const double jj = static_cast<double>(j);
        const double next = ((2.0 * jj + d - 2) * t * cur - jj * prev) / (jj + d - 2);
        prev = cur;
        cur = next;
        sum += coeffs[j + 1] * cur;
    }
    return sum;
}

namespace detail {

// Patch-averaged zonal kernel (1/p) sum_a h(x_a . y_a) with h = sum_k coeffs[k] P_k.
inline Eigen::MatrixXd zonal_gram(const Dataset& a, const Dataset* b, std::span<const double> coeffs) {
    if (b && !(a.geometry == b->geometry))
        throw ArgumentError("Gram needs datasets on the same geometry: " + a.geometry.describe() +
                            " vs " + b->geometry.describe());
    const Geometry& g = a.geometry;
    const int d0 = g.patch_dim();
    const int p = g.patches();
    if (a.x.cols() != g.dim() || (b && b->x.cols() != g.dim()))
        throw ArgumentError("dataset column count does not match its geometry");

    const Eigen::Index m = a.x.rows();
    const Eigen::Index n = b ? b->x.rows() : m;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, n);
    Eigen::MatrixXd dots(m, n);
    for (int patch = 0; patch < p; ++patch) {
        const auto xa = a.x.middleCols(patch * d0, d0);
        if (b) {
            dots.noalias() = xa * b->x.middleCols(patch * d0, d0).transpose();
        } else {
            // Lower triangle only, then mirrored: exactly symmetric.
            dots.setZero();
            dots.selfadjointView<Eigen::Lower>().rankUpdate(xa);
            dots.triangularView<Eigen::StrictlyUpper>() = dots.transpose();
        }
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < m; ++i) out(i, j) += legendre_series(d0, coeffs, dots(i, j));
    }
    if (p > 1) out /= static_cast<double>(p);
    return out;
}

}  // namespace detail

/// Matrix of P_k(x_i . y_j) (patch-averaged for Patched geometries).
/// By the addition theorem this equals Y_k(X) Y_k(Y)^T / harmonic_dim.
inline Eigen::MatrixXd legendre_gram(const Dataset& a, const Dataset& b, int k) {
    if (k < 0) throw ArgumentError("legendre_gram needs degree k >= 0");
    std::vector<double> coeffs(static_cast<std::size_t>(k) + 1, 0.0);
    coeffs.back() = 1.0;
    return detail::zonal_gram(a, &a == &b ? nullptr : &b, coeffs);
}

inline Eigen::MatrixXd legendre_gram(const Dataset& a, int k) { return legendre_gram(a, a, k); }

/// m iid uniform points on the geometry (normalized Gaussian vectors, patch by patch).
inline Dataset sample_sphere(const Geometry& g, Eigen::Index m, std::uint64_t seed) {
    if (m < 1) throw ArgumentError("sample_sphere needs m >= 1");
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int d0 = g.patch_dim();
    Eigen::MatrixXd x(m, g.dim());
    for (Eigen::Index i = 0; i < m; ++i) {
        for (int patch = 0; patch < g.patches(); ++patch) {
            auto block = x.row(i).segment(patch * d0, d0);
            double norm2 = 0.0;
            do {
                for (int j = 0; j < d0; ++j) block(j) = normal(rng);
                norm2 = block.squaredNorm();
            } while (norm2 == 0.0);
            block /= std::sqrt(norm2);
        }
    }
    return Dataset{g, std::move(x), seed};
}

}  // namespace kcurve
