// Prints the analytic learning curve for the Gap-parameterized profile next to
// a small Monte Carlo estimate.
//
//   ./learning_curve_sample [d] [gap]

#include <cstdio>
#include <cstdlib>

#include "kcurve/kcurve.hpp"

int main(int argc, char** argv) {
    const int d = argc > 1 ? std::atoi(argv[1]) : 14;
    const double gap = argc > 2 ? std::atof(argv[2]) : 32.0;
    const auto geometry = kcurve::Geometry::full(d);
    const auto profile = kcurve::gap_profile(gap);

    std::printf("%8s %12s %12s %12s %12s\n", "m", "bias", "variance", "theory", "simulated");
    for (std::int64_t m : kcurve::log_grid(2, 400, 16)) {
        const auto p = kcurve::learning_curve_point(profile, geometry, m);
        const auto sim = kcurve::empirical_mse(profile, geometry, m, 5, 500, 7);
        std::printf("%8lld %12.5f %12.5f %12.5f %12.5f\n", static_cast<long long>(m), p.bias, p.variance, p.total,
                    sim.mean);
    }
}
