#pragma once

#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "kcurve/error.hpp"

namespace kcurve::quadrature {

inline constexpr double kAbsTolerance = 1e-10;
inline constexpr unsigned kMaxDepth = 20;

/// Adaptive 7/15-point Gauss-Kronrod on [a, b]. Throws NumericalError when the
/// estimated absolute error exceeds abs_tol after kMaxDepth bisection levels.
template <class F>
double integrate(F&& f, double a, double b, double abs_tol = kAbsTolerance) {
    if (a == b) return 0.0;
    double error = 0.0;
    double l1 = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, a, b, kMaxDepth, 1e-13, &error, &l1);
    if (!std::isfinite(value) || error > abs_tol) {
        std::ostringstream msg;
        msg << "adaptive quadrature on [" << a << ", " << b << "] did not converge: error estimate "
            << error << " > " << abs_tol;
        throw NumericalError(msg.str());
    }
    return value;
}

}  // namespace kcurve::quadrature
