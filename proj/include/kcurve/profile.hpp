#pragma once

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "kcurve/error.hpp"

namespace kcurve {

/// Kernel eigencoefficients h_k^2 and target powers F_k^2 for degrees k = 1..k_max,
/// plus ridge and label-noise variance. Entry k-1 of each list belongs to degree k;
/// there is no constant (k = 0) mode.
struct SpectralProfile {
    std::vector<double> h2;
    std::vector<double> F2;
    double lambda = 0.0;
    double noise = 0.0;

    int k_max() const noexcept { return static_cast<int>(h2.size()); }

    double h2_at(int k) const { return h2.at(static_cast<std::size_t>(k - 1)); }
    double F2_at(int k) const { return F2.at(static_cast<std::size_t>(k - 1)); }

    /// Sum over degrees k > r, truncated at k_max.
    double h2_tail(int r) const { return tail(h2, r); }
    double F2_tail(int r) const { return tail(F2, r); }

    void validate() const {
        if (h2.empty()) throw ArgumentError("profile needs k_max >= 1");
        if (h2.size() != F2.size())
            throw ArgumentError("profile h2 and F2 lists differ in length (" + std::to_string(h2.size()) +
                                " vs " + std::to_string(F2.size()) + ")");
        for (double v : h2)
            if (!(v >= 0.0) || !std::isfinite(v)) throw ArgumentError("profile h2 entries must be finite and >= 0");
        for (double v : F2)
            if (!(v >= 0.0) || !std::isfinite(v)) throw ArgumentError("profile F2 entries must be finite and >= 0");
        if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ArgumentError("ridge lambda must be >= 0");
        if (!(noise >= 0.0) || !std::isfinite(noise)) throw ArgumentError("noise variance must be >= 0");
    }

private:
    static double tail(const std::vector<double>& v, int r) {
        if (r < 0) r = 0;
        if (static_cast<std::size_t>(r) >= v.size()) return 0.0;
        return std::accumulate(v.begin() + r, v.end(), 0.0);
    }
};

/// h_k^2 = gap^{-(k-1)}, F_k^2 = k^{-exponent}.
inline SpectralProfile gap_profile(double gap, int k_max = 7, double exponent = 2.0, double lambda = 0.0,
                                   double noise = 0.0) {
    if (!(gap > 0.0)) throw ArgumentError("spectral gap must be > 0");
    if (k_max < 1) throw ArgumentError("k_max must be >= 1");
    SpectralProfile p;
    p.lambda = lambda;
    p.noise = noise;
    for (int k = 1; k <= k_max; ++k) {
        p.h2.push_back(std::pow(gap, -(k - 1)));
        p.F2.push_back(std::pow(static_cast<double>(k), -exponent));
    }
    return p;
}

}  // namespace kcurve
