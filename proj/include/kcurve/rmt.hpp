#pragma once

// Marchenko-Pastur law and the resolvent-type integrals
//   zeta(alpha, xi, k) = int (1 + xi t)^{-k} mu_alpha(dt),  k = 1, 2,
// from which chi_B = zeta_2 and chi_V = alpha xi (zeta_1 - zeta_2) follow.

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "kcurve/error.hpp"
#include "kcurve/profile.hpp"
#include "kcurve/quadrature.hpp"

namespace kcurve {

struct MarchenkoPastur {
    double alpha;
    double alpha_minus;
    double alpha_plus;
    double point_mass;

    explicit MarchenkoPastur(double ratio)
        : alpha(ratio),
          alpha_minus((1.0 - std::sqrt(ratio)) * (1.0 - std::sqrt(ratio))),
          alpha_plus((1.0 + std::sqrt(ratio)) * (1.0 + std::sqrt(ratio))),
          point_mass(ratio > 1.0 ? 1.0 - 1.0 / ratio : 0.0) {
        if (!(ratio > 0.0) || !std::isfinite(ratio))
            throw ArgumentError("Marchenko-Pastur ratio must be in (0, inf)");
    }

    double width() const noexcept { return alpha_plus - alpha_minus; }
};

/// Continuous part of the density; the atom at 0 is MarchenkoPastur::point_mass.
inline double mp_pdf(const MarchenkoPastur& mp, double t) {
    if (t <= mp.alpha_minus || t >= mp.alpha_plus || t <= 0.0) return 0.0;
    return std::sqrt((mp.alpha_plus - t) * (t - mp.alpha_minus)) / (2.0 * std::numbers::pi * mp.alpha * t);
}

namespace detail {

// Continuous part after t = alpha_- + width * sin^2(theta): the square-root
// endpoint factors cancel and the integrand is smooth on [0, pi/2].
inline double mp_theta_point(const MarchenkoPastur& mp, double theta) {
    const double s = std::sin(theta);
    return mp.alpha_minus + mp.width() * s * s;
}

inline double mp_theta_weight(const MarchenkoPastur& mp, double theta) {
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    const double w = mp.width();
    return w * w * s * s * c * c / (std::numbers::pi * mp.alpha * mp_theta_point(mp, theta));
}

// int g(t) mu_alpha^{cont}(dt) over [alpha_-, alpha_-+width*sin^2(theta_max)].
template <class G>
double mp_integrate_continuous(const MarchenkoPastur& mp, G&& g,
                               double theta_max = std::numbers::pi / 2) {
    return quadrature::integrate(
        [&](double theta) { return g(mp_theta_point(mp, theta)) * mp_theta_weight(mp, theta); }, 0.0,
        theta_max);
}

}  // namespace detail

/// P(T <= t) under mu_alpha, atom included.
inline double mp_cdf(const MarchenkoPastur& mp, double t) {
    if (t < 0.0) return 0.0;
    if (t >= mp.alpha_plus) return 1.0;
    if (t <= mp.alpha_minus) return mp.point_mass;
    const double u = std::sqrt((t - mp.alpha_minus) / mp.width());
    const double theta = std::asin(std::min(1.0, u));
    const double cont = detail::mp_integrate_continuous(mp, [](double) { return 1.0; }, theta);
    return std::min(1.0, mp.point_mass + cont);
}

/// P(T < t): differs from mp_cdf only at the atom t = 0.
inline double mp_cdf_left(const MarchenkoPastur& mp, double t) {
    if (t <= 0.0) return 0.0;
    return mp_cdf(mp, t);
}

enum class ZetaMethod {
    ClosedForm,
    Quadrature,
    /// Both routes; throws ConsistencyError when they differ by more than 1e-8.
    Verified,
};

inline constexpr double kZetaConsistencyTolerance = 1e-8;

namespace detail {

inline void check_zeta_args(double alpha, double xi, int k) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ArgumentError("zeta needs alpha in (0, inf)");
    if (!(xi >= 0.0)) throw ArgumentError("zeta needs xi >= 0");
    if (k != 1 && k != 2) throw ArgumentError("zeta is defined for k = 1 or 2");
}

// sqrt(b (1 + b)) without overflow for large b.
inline double sqrt_b_1b(double b) { return b > 1.0 ? b * std::sqrt(1.0 + 1.0 / b) : std::sqrt(b * (1.0 + b)); }

// b + 1/2 - sqrt(b (1 + b)) = 1 / (4 (b + 1/2 + sqrt(b (1 + b))))
inline double half_gap(double b) { return 0.25 / (b + 0.5 + sqrt_b_1b(b)); }

// int_0^1 sqrt(u(1-u)) / ((u+b)(u+c)) du. Partial fractions give
// pi (-1 + (1+b+c) / (sqrt(b(1+b)) + sqrt(c(1+c)))), written without cancellation.
inline double beta_integral_1(double b, double c) {
    const double s = sqrt_b_1b(b) + sqrt_b_1b(c);
    return std::numbers::pi * (half_gap(b) + half_gap(c)) / s;
}

// int_0^1 sqrt(u(1-u)) / ((u+b)^2 (u+c)) du.
inline double beta_integral_2(double b, double c) {
    const double inner = (b + c + 2.0 * b * c) + 2.0 * std::sqrt((b + 1.0) * (c + 1.0)) * std::sqrt(b * c);
    return std::numbers::pi / (2.0 * sqrt_b_1b(b) * inner);
}

// Continuous-part contribution to zeta (atom excluded), xi finite and > 0.
inline double zeta_continuous_closed(double alpha, double xi, int k) {
    const MarchenkoPastur mp(alpha);
    const double width = mp.width();
    const double b = (1.0 + xi * mp.alpha_minus) / (xi * width);
    const double c = mp.alpha_minus / width;
    const double pre = 1.0 / (2.0 * std::numbers::pi * alpha * xi);
    if (k == 1) return pre * beta_integral_1(b, c);
    return pre / (xi * width) * beta_integral_2(b, c);
}

inline double zeta_continuous_quadrature(double alpha, double xi, int k) {
    const MarchenkoPastur mp(alpha);
    return mp_integrate_continuous(mp, [&](double t) {
        const double q = 1.0 / (1.0 + xi * t);
        return k == 1 ? q : q * q;
    });
}

inline double zeta_continuous(double alpha, double xi, int k, ZetaMethod method) {
    switch (method) {
        case ZetaMethod::ClosedForm:
            return zeta_continuous_closed(alpha, xi, k);
        case ZetaMethod::Quadrature:
            return zeta_continuous_quadrature(alpha, xi, k);
        case ZetaMethod::Verified: {
            const double closed = zeta_continuous_closed(alpha, xi, k);
            const double quad = zeta_continuous_quadrature(alpha, xi, k);
            if (!(std::abs(closed - quad) <= kZetaConsistencyTolerance)) {
                std::ostringstream msg;
                msg.precision(17);
                msg << "zeta closed form " << closed << " disagrees with quadrature " << quad
                    << " at alpha=" << alpha << " xi=" << xi << " k=" << k;
                throw ConsistencyError(msg.str());
            }
            return closed;
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

/// int (1 + xi t)^{-k} mu_alpha(dt), including the atom at 0 when alpha > 1.
/// xi = +inf gives the ridgeless limit (the atom mass alone).
inline double zeta(double alpha, double xi, int k, ZetaMethod method = ZetaMethod::ClosedForm) {
    detail::check_zeta_args(alpha, xi, k);
    const double atom = alpha > 1.0 ? 1.0 - 1.0 / alpha : 0.0;
    if (xi == 0.0) return 1.0;
    if (std::isinf(xi)) return atom;
    return atom + detail::zeta_continuous(alpha, xi, k, method);
}

inline double chi_b(double alpha, double xi, ZetaMethod method = ZetaMethod::ClosedForm) {
    return zeta(alpha, xi, 2, method);
}

/// alpha xi^2 int t (1 + xi t)^{-2} mu_alpha(dt), evaluated as alpha xi (zeta_1 - zeta_2)
/// on the continuous part (the atom cancels exactly).
inline double chi_v(double alpha, double xi, ZetaMethod method = ZetaMethod::ClosedForm) {
    detail::check_zeta_args(alpha, xi, 1);
    if (xi == 0.0) return 0.0;
    if (std::isinf(xi)) {
        if (alpha < 1.0) return alpha / (1.0 - alpha);
        if (alpha > 1.0) return 1.0 / (alpha - 1.0);
        return std::numeric_limits<double>::infinity();
    }
    const double diff =
        detail::zeta_continuous(alpha, xi, 1, method) - detail::zeta_continuous(alpha, xi, 2, method);
    return std::max(0.0, alpha * xi * diff);
}

/// chi_V by direct quadrature of its defining integrand.
inline double chi_v_direct(double alpha, double xi) {
    detail::check_zeta_args(alpha, xi, 1);
    if (xi == 0.0) return 0.0;
    const MarchenkoPastur mp(alpha);
    return alpha * xi * xi * detail::mp_integrate_continuous(mp, [&](double t) {
        const double q = 1.0 / (1.0 + xi * t);
        return t * q * q;
    });
}

struct EffectiveRegime {
    int r;
    double gamma;  ///< lambda + h^2_{>r}
    double xi;     ///< h_r^2 / (alpha gamma); +inf when gamma = 0 < h_r^2
    double alpha;
};

inline EffectiveRegime effective_regime(const SpectralProfile& profile, int r, double alpha) {
    if (r < 1 || r > profile.k_max())
        throw ArgumentError("degree r=" + std::to_string(r) + " outside 1.." + std::to_string(profile.k_max()));
    if (!(alpha > 0.0)) throw ArgumentError("effective_regime needs alpha > 0");
    const double hr = profile.h2_at(r);
    if (!(hr >= 0.0)) throw ArgumentError("h_r^2 must be >= 0");
    const double gamma = profile.lambda + profile.h2_tail(r);
    if (gamma == 0.0) {
        if (hr == 0.0)
            throw SingularRegime("effective ridge and h_r^2 both vanish at r=" + std::to_string(r));
        return {r, gamma, std::numeric_limits<double>::infinity(), alpha};
    }
    return {r, gamma, hr / (alpha * gamma), alpha};
}

}  // namespace kcurve
