#pragma once

// Analytic bias/variance per critical degree r and the glued sample-wise
// learning curve
//   LC(m) = sum_r [ B_r(N_r/m) - (r-1) F_r^2 ] + V_r(N_{<=r}/m),
// with N_r the degree-r harmonic dimension and N_{<=r} the cumulative count.
// Degrees run to the profile's k_max, so LC plateaus at F^2_{>k_max} = 0 once
// m is far beyond N_{<=k_max}.

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "kcurve/harmonics.hpp"
#include "kcurve/profile.hpp"
#include "kcurve/rmt.hpp"

namespace kcurve {

struct ErrorTerms {
    double bias;
    double variance;
    double total;
};

struct CurvePoint {
    std::int64_t m;
    double bias;
    double variance;
    double total;
};

struct LearningCurve {
    std::vector<CurvePoint> points;
    Geometry geometry;
    SpectralProfile profile;

    std::vector<double> totals() const {
        std::vector<double> out;
        out.reserve(points.size());
        for (const auto& p : points) out.push_back(p.total);
        return out;
    }
};

/// Thrown by learning_curve; carries the offending degree and sample count.
class CurveTermError : public std::runtime_error {
public:
    CurveTermError(int r, std::int64_t m, const std::string& cause)
        : std::runtime_error("learning curve term r=" + std::to_string(r) + " m=" + std::to_string(m) +
                             " failed: " + cause),
          r_(r),
          m_(m) {}

    int degree() const noexcept { return r_; }
    std::int64_t samples() const noexcept { return m_; }

private:
    int r_;
    std::int64_t m_;
};

namespace detail {

inline void check_degree(const SpectralProfile& profile, int r) {
    if (r < 1 || r > profile.k_max())
        throw ArgumentError("degree r=" + std::to_string(r) + " outside 1.." + std::to_string(profile.k_max()));
}

}  // namespace detail

/// B_r(alpha) = chi_B(alpha, xi_r) F_r^2 + F^2_{>r}.
inline double bias_r(const SpectralProfile& profile, int r, double alpha) {
    detail::check_degree(profile, r);
    const EffectiveRegime reg = effective_regime(profile, r, alpha);
    return chi_b(alpha, reg.xi) * profile.F2_at(r) + profile.F2_tail(r);
}

/// V_r(alpha) = chi_V(alpha, xi_r) (F^2_{>r} + noise).
inline double variance_r(const SpectralProfile& profile, int r, double alpha) {
    detail::check_degree(profile, r);
    const EffectiveRegime reg = effective_regime(profile, r, alpha);
    const double multiplier = profile.F2_tail(r) + profile.noise;
    if (multiplier == 0.0) return 0.0;
    return chi_v(alpha, reg.xi) * multiplier;
}

/// Test error at critical degree r. For a Patched geometry alpha is read
/// against p*N(d0, r).
inline ErrorTerms err_r(const SpectralProfile& profile, int r, double alpha) {
    const double b = bias_r(profile, r, alpha);
    const double v = variance_r(profile, r, alpha);
    return {b, v, b + v};
}

inline CurvePoint learning_curve_point(const SpectralProfile& profile, const Geometry& geometry, std::int64_t m) {
    const double mm = static_cast<double>(m);
    double bias = 0.0;
    double variance = 0.0;
    double cumulative = 0.0;
    for (int r = 1; r <= profile.k_max(); ++r) {
        try {
            const double n_r = static_cast<double>(harmonic_dim(geometry, r));
            cumulative += n_r;
            bias += bias_r(profile, r, n_r / mm) - (r - 1) * profile.F2_at(r);
            variance += variance_r(profile, r, cumulative / mm);
        } catch (const std::exception& e) {
            throw CurveTermError(r, m, e.what());
        }
    }
    // The glued bias is a difference of nonnegative sums; clip rounding noise.
    bias = std::max(bias, 0.0);
    return {m, bias, variance, bias + variance};
}

inline LearningCurve learning_curve(const SpectralProfile& profile, const Geometry& geometry,
                                    const std::vector<std::int64_t>& m_grid) {
    profile.validate();
    for (std::size_t i = 0; i < m_grid.size(); ++i) {
        if (m_grid[i] < 1) throw ArgumentError("m_grid entries must be >= 1");
        if (i > 0 && m_grid[i] <= m_grid[i - 1]) throw ArgumentError("m_grid must be strictly increasing");
    }
    LearningCurve curve{{}, geometry, profile};
    curve.points.reserve(m_grid.size());
    for (std::int64_t m : m_grid) curve.points.push_back(learning_curve_point(profile, geometry, m));
    return curve;
}

/// Indices of strict three-point maxima whose topographic prominence, relative
/// to the peak height, is at least min_rel_prominence.
inline std::vector<std::size_t> local_maxima(const std::vector<double>& v, double min_rel_prominence = 1e-3) {
    std::vector<std::size_t> peaks;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        if (!(v[i] > v[i - 1] && v[i] > v[i + 1])) continue;
        double left = v[i];
        for (std::size_t j = i; j-- > 0;) {
            if (v[j] > v[i]) break;
            left = std::min(left, v[j]);
        }
        double right = v[i];
        for (std::size_t j = i + 1; j < v.size(); ++j) {
            if (v[j] > v[i]) break;
            right = std::min(right, v[j]);
        }
        const double prominence = v[i] - std::max(left, right);
        if (v[i] > 0.0 && prominence / v[i] >= min_rel_prominence) peaks.push_back(i);
    }
    return peaks;
}

/// Round(exp(linspace(log lo, log hi, count))) with duplicates removed.
inline std::vector<std::int64_t> log_grid(std::int64_t lo, std::int64_t hi, int count) {
    if (lo < 1 || hi < lo || count < 1) throw ArgumentError("log_grid needs 1 <= lo <= hi and count >= 1");
    std::vector<std::int64_t> out;
    const double a = std::log(static_cast<double>(lo));
    const double b = std::log(static_cast<double>(hi));
    for (int i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        const auto m = static_cast<std::int64_t>(std::llround(std::exp(a + (b - a) * t)));
        if (out.empty() || m > out.back()) out.push_back(m);
    }
    return out;
}

}  // namespace kcurve
