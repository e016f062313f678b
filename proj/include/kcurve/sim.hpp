#pragma once

// Monte Carlo side: kernel matrices, random harmonic targets, ridge(less)
// regression, empirical test error and empirical spectra scored against the
// Marchenko-Pastur law.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <numeric>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "kcurve/error.hpp"
#include "kcurve/harmonics.hpp"
#include "kcurve/profile.hpp"
#include "kcurve/random.hpp"
#include "kcurve/rmt.hpp"

namespace kcurve {

// ---------------------------------------------------------------------------
// Kernels

namespace detail {

inline std::vector<double> kernel_coefficients(const SpectralProfile& profile) {
    std::vector<double> c(profile.h2.size() + 1, 0.0);
    std::copy(profile.h2.begin(), profile.h2.end(), c.begin() + 1);
    return c;
}

}  // namespace detail

/// K(x, y) = (1/p) sum_patches sum_k h_k^2 P_k(x_a . y_a); p = 1 on the full sphere.
inline Eigen::MatrixXd build_kernel(const Dataset& train, const Dataset& test, const SpectralProfile& profile) {
    const auto coeffs = detail::kernel_coefficients(profile);
    return detail::zonal_gram(test, &test == &train ? nullptr : &train, coeffs);
}

inline Eigen::MatrixXd build_kernel(const Dataset& data, const SpectralProfile& profile) {
    return build_kernel(data, data, profile);
}

// ---------------------------------------------------------------------------
// Targets

/// f(x) = sum_k F_k s_k y_k(x), y_k(x) = sum_j w_{k,j} prod_{i<k} x_{(j+i) mod d0}
/// with windows taken inside each patch, and s_k fixed so that E|s_k y_k|^2 = 1.
struct TargetFunction {
    Geometry geometry;
    std::vector<int> degrees;
    Eigen::MatrixXd weights;  ///< row k-1 holds w_{k, .}, length d
    std::vector<double> scales;
    std::vector<double> amplitudes;
    std::uint64_t seed = 0;

    /// Unnormalized y_k at one point.
    double raw_component(const Eigen::Ref<const Eigen::RowVectorXd>& x, int k) const {
        const int d0 = geometry.patch_dim();
        const auto w = weights.row(k - 1);
        double sum = 0.0;
        for (int patch = 0; patch < geometry.patches(); ++patch) {
            const int base = patch * d0;
            for (int j = 0; j < d0; ++j) {
                double prod = 1.0;
                for (int i = 0; i < k; ++i) prod *= x(base + (j + i) % d0);
                sum += w(base + j) * prod;
            }
        }
        return sum;
    }

    double operator()(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
        double f = 0.0;
        for (std::size_t i = 0; i < degrees.size(); ++i) {
            if (amplitudes[i] == 0.0) continue;
            f += amplitudes[i] * scales[i] * raw_component(x, degrees[i]);
        }
        return f;
    }

    Eigen::VectorXd evaluate(const Dataset& data) const {
        if (!(data.geometry == geometry)) throw ArgumentError("target evaluated on a different geometry");
        Eigen::VectorXd out(data.size());
        for (Eigen::Index i = 0; i < data.size(); ++i) out(i) = (*this)(data.x.row(i));
        return out;
    }
};

inline constexpr std::size_t kDefaultNormSamples = 20000;

inline TargetFunction sample_target(const SpectralProfile& profile, const Geometry& geometry, std::uint64_t seed,
                                    std::size_t norm_samples = kDefaultNormSamples) {
    profile.validate();
    if (norm_samples < 10000) throw ArgumentError("sample_target needs norm_samples >= 1e4");
    const int k_max = profile.k_max();
    if (k_max > geometry.patch_dim())
        throw ArgumentError("target degree " + std::to_string(k_max) + " exceeds patch dimension " +
                            std::to_string(geometry.patch_dim()) + "; monomial windows would repeat coordinates");

    TargetFunction f{geometry, {}, Eigen::MatrixXd(k_max, geometry.dim()), {}, {}, seed};
    Rng rng(derive_seed(seed, {stream::target}));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int k = 1; k <= k_max; ++k) {
        f.degrees.push_back(k);
        for (int j = 0; j < geometry.dim(); ++j) f.weights(k - 1, j) = normal(rng);
        f.amplitudes.push_back(std::sqrt(profile.F2_at(k)));
    }

    const Dataset probe =
        sample_sphere(geometry, static_cast<Eigen::Index>(norm_samples), derive_seed(seed, {stream::normalization}));
    for (int k = 1; k <= k_max; ++k) {
        double second = 0.0;
        for (Eigen::Index i = 0; i < probe.size(); ++i) {
            const double y = f.raw_component(probe.x.row(i), k);
            second += y * y;
        }
        second /= static_cast<double>(probe.size());
        if (!(second >= 1e-12))
            throw NumericalError("degenerate target normalization at degree " + std::to_string(k));
        f.scales.push_back(1.0 / std::sqrt(second));
    }
    return f;
}

// ---------------------------------------------------------------------------
// Kernel ridge regression

struct KrrResult {
    Eigen::VectorXd predictions;
    double jitter = 0.0;  ///< diagonal shift actually used (0 when lambda > 0)
};

inline constexpr double kJitterLadder[] = {1e-12, 1e-10, 1e-8};

/// predictions = K_cross (K_train + lambda I)^{-1} y. With lambda = 0 a
/// diagonal jitter (fractions of trace/m) is escalated until Cholesky succeeds.
inline KrrResult krr_predict(const Eigen::MatrixXd& k_train, const Eigen::VectorXd& y, double lambda,
                             const Eigen::MatrixXd& k_cross) {
    const Eigen::Index m = k_train.rows();
    if (k_train.cols() != m || m == 0) throw ArgumentError("K_train must be square and nonempty");
    if (y.size() != m) throw ArgumentError("y_train length does not match K_train");
    if (k_cross.cols() != m) throw ArgumentError("K_cross column count does not match K_train");
    if (!(lambda >= 0.0)) throw ArgumentError("ridge lambda must be >= 0");
    const double scale = k_train.diagonal().cwiseAbs().maxCoeff();
    if (!((k_train - k_train.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(scale, 1.0)))
        throw ArgumentError("K_train must be symmetric");

    auto attempt = [&](double shift) -> std::optional<Eigen::VectorXd> {
        Eigen::MatrixXd a = k_train;
        a.diagonal().array() += shift;
        Eigen::LLT<Eigen::MatrixXd> llt(a);
        if (llt.info() != Eigen::Success) return std::nullopt;
        Eigen::VectorXd beta = llt.solve(y);
        if (!beta.allFinite()) return std::nullopt;
        return beta;
    };

    if (lambda > 0.0) {
        auto beta = attempt(lambda);
        if (!beta) throw NumericalError("Cholesky of K_train + lambda I failed");
        return {k_cross * *beta, 0.0};
    }

    const double trace_per_row = k_train.trace() / static_cast<double>(m);
    std::vector<double> tried;
    for (double rel : kJitterLadder) {
        const double jitter = rel * trace_per_row;
        tried.push_back(jitter);
        if (auto beta = attempt(jitter)) return {k_cross * *beta, jitter};
    }
    std::ostringstream msg;
    msg << "ridgeless Cholesky failed after jitter ladder {";
    for (std::size_t i = 0; i < tried.size(); ++i) msg << (i ? ", " : "") << tried[i];
    msg << "}";
    throw NumericalError(msg.str(), tried);
}

// ---------------------------------------------------------------------------
// Empirical test error

struct SimOptions {
    int threads = 1;
    bool fixed_target = false;  ///< one target for all trials instead of a fresh draw per trial
    std::size_t norm_samples = kDefaultNormSamples;
};

struct MseResult {
    double mean = 0.0;
    double std = 0.0;  ///< sample standard deviation across trials (0 for one trial)
    int trials = 0;
    double jitter_used = 0.0;  ///< largest jitter over trials
    double q25 = 0.0, median = 0.0, q75 = 0.0;
    std::vector<double> per_trial;
};

namespace detail {

inline double quantile_sorted(const std::vector<double>& v, double q) {
    if (v.empty()) return 0.0;
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// Runs body(i) for i in [0, n) on up to `threads` workers; rethrows the
// exception of the lowest failing index.
template <class Body>
void parallel_for(int n, int threads, Body&& body) {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next++; i < n; i = next++) {
            try {
                body(i);
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    };
    const int workers = std::clamp(threads, 1, std::max(n, 1));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace detail

struct TrialResult {
    double mse;
    double jitter;
};

/// One kernel-regression trial; a pure function of (inputs, trial_seed, target_seed).
inline TrialResult run_trial(const SpectralProfile& profile, const Geometry& geometry, std::int64_t m,
                             std::int64_t test_points, std::uint64_t trial_seed, std::uint64_t target_seed,
                             std::size_t norm_samples) {
    const TargetFunction f = sample_target(profile, geometry, target_seed, norm_samples);
    const Dataset train = sample_sphere(geometry, m, derive_seed(trial_seed, {stream::train}));
    const Dataset test = sample_sphere(geometry, test_points, derive_seed(trial_seed, {stream::test}));

    Eigen::VectorXd y = f.evaluate(train);
    if (profile.noise > 0.0) {
        Rng rng(derive_seed(trial_seed, {stream::noise}));
        std::normal_distribution<double> normal(0.0, std::sqrt(profile.noise));
        for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += normal(rng);
    }
    const Eigen::MatrixXd k_train = build_kernel(train, profile);
    const Eigen::MatrixXd k_cross = build_kernel(train, test, profile);
    const KrrResult fit = krr_predict(k_train, y, profile.lambda, k_cross);
    const Eigen::VectorXd truth = f.evaluate(test);
    return {(fit.predictions - truth).squaredNorm() / static_cast<double>(test_points), fit.jitter};
}

/// Mean and spread of the kernel-regression test error over independent trials,
/// each with a fresh training set, test set, label noise and (by default) target.
inline MseResult empirical_mse(const SpectralProfile& profile, const Geometry& geometry, std::int64_t m,
                               int trials, std::int64_t test_points, std::uint64_t seed,
                               const SimOptions& options = {}) {
    profile.validate();
    if (m < 1) throw ArgumentError("empirical_mse needs m >= 1");
    if (trials < 1) throw ArgumentError("empirical_mse needs trials >= 1");
    if (test_points < 1) throw ArgumentError("empirical_mse needs test_points >= 1");

    std::vector<TrialResult> results(static_cast<std::size_t>(trials));
    detail::parallel_for(trials, options.threads, [&](int t) {
        const std::uint64_t trial_seed = derive_seed(seed, {static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(t)});
        const std::uint64_t target_seed =
            options.fixed_target ? derive_seed(seed, {stream::target}) : derive_seed(trial_seed, {stream::target});
        results[static_cast<std::size_t>(t)] =
            run_trial(profile, geometry, m, test_points, trial_seed, target_seed, options.norm_samples);
    });

    MseResult out;
    out.trials = trials;
    for (const auto& r : results) {
        out.per_trial.push_back(r.mse);
        out.jitter_used = std::max(out.jitter_used, r.jitter);
    }
    const double n = static_cast<double>(trials);
    out.mean = std::accumulate(out.per_trial.begin(), out.per_trial.end(), 0.0) / n;
    if (trials > 1) {
        double ss = 0.0;
        for (double v : out.per_trial) ss += (v - out.mean) * (v - out.mean);
        out.std = std::sqrt(ss / (n - 1.0));
    }
    std::vector<double> sorted = out.per_trial;
    std::sort(sorted.begin(), sorted.end());
    out.q25 = detail::quantile_sorted(sorted, 0.25);
    out.median = detail::quantile_sorted(sorted, 0.5);
    out.q75 = detail::quantile_sorted(sorted, 0.75);
    return out;
}

// ---------------------------------------------------------------------------
// Spectra

/// Kolmogorov-Smirnov distance sup_t |F_n(t) - F(t)| between the empirical CDF
/// of a sorted sample and mu_alpha; left limits are compared at every sample
/// value so ties and the atom at 0 are handled exactly.
inline double ks_distance(const std::vector<double>& sorted, const MarchenkoPastur& mp) {
    if (sorted.empty()) throw ArgumentError("ks_distance needs a nonempty sample");
    if (!std::is_sorted(sorted.begin(), sorted.end())) throw ArgumentError("ks_distance needs a sorted sample");
    const double n = static_cast<double>(sorted.size());
    double dist = 0.0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        const double v = sorted[i];
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == v) ++j;
        dist = std::max(dist, std::abs(static_cast<double>(i) / n - mp_cdf_left(mp, v)));
        dist = std::max(dist, std::abs(static_cast<double>(j) / n - mp_cdf(mp, v)));
        i = j;
    }
    return std::min(dist, 1.0);
}

struct SpectrumResult {
    std::vector<double> eigenvalues;  ///< ascending
    double ratio = 0.0;               ///< m / N_r, the reference law's aspect ratio
    double ks = 0.0;
    int degree = 0;
    Geometry geometry = Geometry::full(2);
    std::uint64_t n_r = 0;
    std::int64_t m = 0;
};

/// Spectrum of the degree-r Legendre Gram, i.e. Y_r Y_r^T / N_r, scored against
/// mu_{m/N_r}. Eigenvalues within 1e-8 * trace/m of zero are snapped to 0.
inline SpectrumResult empirical_spectrum(const Dataset& data, int r) {
    if (data.size() < 2) throw ArgumentError("empirical_spectrum needs m >= 2");
    if (r < 1) throw ArgumentError("empirical_spectrum needs degree r >= 1");
    const Eigen::MatrixXd gram = legendre_gram(data, r);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolver failed");

    SpectrumResult out;
    out.degree = r;
    out.geometry = data.geometry;
    out.m = data.size();
    out.n_r = harmonic_dim(data.geometry, r);
    out.ratio = static_cast<double>(out.m) / static_cast<double>(out.n_r);
    const double cutoff = 1e-8 * gram.trace() / static_cast<double>(out.m);
    out.eigenvalues.resize(static_cast<std::size_t>(out.m));
    for (Eigen::Index i = 0; i < out.m; ++i) {
        const double e = solver.eigenvalues()(i);
        out.eigenvalues[static_cast<std::size_t>(i)] = std::abs(e) <= cutoff ? 0.0 : e;
    }
    std::sort(out.eigenvalues.begin(), out.eigenvalues.end());
    out.ks = ks_distance(out.eigenvalues, MarchenkoPastur(out.ratio));
    return out;
}

}  // namespace kcurve
