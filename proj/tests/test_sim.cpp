#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "kcurve/sim.hpp"

using namespace kcurve;

namespace {

double min_eigenvalue(const Eigen::MatrixXd& m) {
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

// mu_alpha quantile by bisection on the CDF.
double mp_quantile(const MarchenkoPastur& mp, double q) {
    if (q <= mp.point_mass) return 0.0;
    double lo = mp.alpha_minus, hi = mp.alpha_plus;
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        (mp_cdf(mp, mid) < q ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

SpectralProfile zero_target(double gap, int k_max) {
    SpectralProfile p = gap_profile(gap, k_max);
    std::fill(p.F2.begin(), p.F2.end(), 0.0);
    return p;
}

}  // namespace

TEST(Kernel, DiagonalIsCoefficientSum) {
    const SpectralProfile p = gap_profile(32.0);
    double sum = 0.0;
    for (double h : p.h2) sum += h;
    for (const Geometry& g : {Geometry::full(24), Geometry::patched(8, 3)}) {
        const Eigen::MatrixXd k = build_kernel(sample_sphere(g, 10, 1), p);
        for (Eigen::Index i = 0; i < 10; ++i) EXPECT_NEAR(k(i, i), sum, 1e-14);
    }
}

TEST(Kernel, DegreeOneIsPlainGram) {
    SpectralProfile p;
    p.h2 = {1.0};
    p.F2 = {1.0};
    const Dataset a = sample_sphere(Geometry::full(7), 12, 3);
    const Dataset b = sample_sphere(Geometry::full(7), 5, 4);
    EXPECT_LT((build_kernel(a, p) - a.x * a.x.transpose()).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((build_kernel(a, b, p) - b.x * a.x.transpose()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Kernel, CrossShapeIsTestByTrain) {
    const SpectralProfile p = gap_profile(4.0, 3);
    const Dataset train = sample_sphere(Geometry::full(5), 6, 1);
    const Dataset test = sample_sphere(Geometry::full(5), 4, 2);
    const Eigen::MatrixXd k = build_kernel(train, test, p);
    EXPECT_EQ(k.rows(), 4);
    EXPECT_EQ(k.cols(), 6);
    EXPECT_THROW(build_kernel(train, sample_sphere(Geometry::full(6), 4, 2), p), ArgumentError);
}

TEST(Kernel, GapThirtyTwoSmallGramIsPsd) {
    const Eigen::MatrixXd k = build_kernel(sample_sphere(Geometry::full(24), 4, 7), gap_profile(32.0));
    ASSERT_EQ(k.rows(), 4);
    EXPECT_TRUE(k == k.transpose());
    EXPECT_GE(min_eigenvalue(k), -1e-12);
}

TEST(Kernel, PsdAcrossProfiles) {
    for (double gap : {2.0, 32.0, 128.0})
        for (const Geometry& g : {Geometry::full(5), Geometry::full(24), Geometry::patched(7, 4)}) {
            const int k_max = std::min(7, g.patch_dim());
            const Eigen::MatrixXd k = build_kernel(sample_sphere(g, 150, 9), gap_profile(gap, k_max));
            EXPECT_GE(min_eigenvalue(k), -1e-8 * k.trace() / 150) << g.describe() << " gap=" << gap;
        }
}

TEST(Target, ZeroAmplitudesGiveZeroFunction) {
    const TargetFunction f = sample_target(zero_target(32.0, 7), Geometry::full(24), 5);
    const Dataset pts = sample_sphere(Geometry::full(24), 20, 6);
    EXPECT_TRUE(f.evaluate(pts).isZero(0.0));
}

TEST(Target, DegreeOneScaleMatchesExactMoment) {
    // E|w.x|^2 = |w|^2 / d on the sphere.
    SpectralProfile p = gap_profile(32.0, 3);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const TargetFunction f = sample_target(p, Geometry::full(24), seed);
        const double exact = std::sqrt(24.0 / f.weights.row(0).squaredNorm());
        EXPECT_NEAR(f.scales[0] / exact, 1.0, 0.03);
    }
}

TEST(Target, ComponentsHaveUnitSecondMoment) {
    const Geometry g = Geometry::full(12);
    const TargetFunction f = sample_target(gap_profile(8.0, 5), g, 21);
    const Dataset pts = sample_sphere(g, 40000, 22);
    for (int k = 1; k <= 5; ++k) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < pts.size(); ++i) s += std::pow(f.scales[static_cast<std::size_t>(k - 1)] * f.raw_component(pts.x.row(i), k), 2);
        EXPECT_NEAR(s / static_cast<double>(pts.size()), 1.0, 0.08) << "k=" << k;
    }
}

TEST(Target, CyclicWindows) {
    SpectralProfile p = gap_profile(2.0, 3);
    TargetFunction f = sample_target(p, Geometry::full(4), 1);
    f.weights.setZero();
    f.weights(2, 3) = 1.0;  // degree 3, window starting at the last coordinate
    Eigen::RowVectorXd x(4);
    x << 0.5, 0.3, 0.7, 0.2;
    EXPECT_DOUBLE_EQ(f.raw_component(x, 3), 0.2 * 0.5 * 0.3);
}

TEST(Target, DeterministicGivenSeed) {
    const Geometry g = Geometry::patched(6, 2);
    const TargetFunction a = sample_target(gap_profile(32.0, 4), g, 77);
    const TargetFunction b = sample_target(gap_profile(32.0, 4), g, 77);
    const Dataset pts = sample_sphere(g, 10, 1);
    EXPECT_TRUE(a.evaluate(pts) == b.evaluate(pts));
    const TargetFunction c = sample_target(gap_profile(32.0, 4), g, 78);
    EXPECT_FALSE(a.evaluate(pts) == c.evaluate(pts));
}

TEST(Target, Preconditions) {
    EXPECT_THROW(sample_target(gap_profile(2.0, 3), Geometry::full(5), 1, 9999), ArgumentError);
    EXPECT_THROW(sample_target(gap_profile(2.0, 7), Geometry::full(5), 1), ArgumentError);
    EXPECT_THROW(sample_target(gap_profile(2.0, 7), Geometry::full(24), 1).evaluate(sample_sphere(Geometry::full(23), 2, 1)),
                 ArgumentError);
}

TEST(Krr, SinglePointScalarSolve) {
    Eigen::MatrixXd k(1, 1);
    k << 2.5;
    Eigen::VectorXd y(1);
    y << 1.7;
    Eigen::MatrixXd kx(3, 1);
    kx << 0.5, -1.0, 2.5;
    const KrrResult r = krr_predict(k, y, 0.0, kx);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(r.predictions(i), kx(i, 0) / 2.5 * 1.7, 1e-10);
    EXPECT_GT(r.jitter, 0.0);
}

TEST(Krr, RidgelessInterpolates) {
    const Dataset x = sample_sphere(Geometry::full(10), 30, 2);
    const Eigen::MatrixXd k = build_kernel(x, gap_profile(4.0, 3));
    const Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(30, -1.0, 2.0);
    const KrrResult r = krr_predict(k, y, 0.0, k);
    EXPECT_LT((r.predictions - y).norm() / y.norm(), 1e-6);
}

TEST(Krr, ThreeByThreeAgainstAdjugateInverse) {
    Eigen::Matrix3d k;
    k << 4, 1, 0.5, 1, 3, 0.2, 0.5, 0.2, 2;
    const double lambda = 0.3;
    Eigen::Matrix3d a = k + lambda * Eigen::Matrix3d::Identity();
    // Hand-rolled adjugate / determinant inverse.
    Eigen::Matrix3d adj;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const int r0 = (j + 1) % 3, r1 = (j + 2) % 3, c0 = (i + 1) % 3, c1 = (i + 2) % 3;
            adj(i, j) = a(r0, c0) * a(r1, c1) - a(r0, c1) * a(r1, c0);
        }
    const double det = a(0, 0) * adj(0, 0) + a(0, 1) * adj(1, 0) + a(0, 2) * adj(2, 0);
    const Eigen::Matrix3d inv = adj / det;
    ASSERT_LT((inv * a - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-14);

    Eigen::Vector3d y(1.0, -2.0, 0.5);
    Eigen::MatrixXd kx(2, 3);
    kx << 0.3, 0.1, -0.4, 1.0, 2.0, 3.0;
    const KrrResult r = krr_predict(k, y, lambda, kx);
    EXPECT_LT((r.predictions - kx * inv * y).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_EQ(r.jitter, 0.0);
}

TEST(Krr, LadderExhaustionReportsJitters) {
    Eigen::MatrixXd k(2, 2);
    k << 1.0, 0.0, 0.0, -1.0;
    try {
        krr_predict(k, Eigen::VectorXd::Ones(2), 0.0, k);
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        ASSERT_EQ(e.jitter_ladder().size(), 3u);
        EXPECT_EQ(e.jitter_ladder()[0], 0.0);  // trace is 0 here
    }
    Eigen::MatrixXd neg(1, 1);
    neg << -2.0;
    try {
        krr_predict(neg, Eigen::VectorXd::Ones(1), 0.0, neg);
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        ASSERT_EQ(e.jitter_ladder().size(), 3u);
        EXPECT_DOUBLE_EQ(e.jitter_ladder()[2], -2e-8);
    }
}

TEST(Krr, Preconditions) {
    Eigen::MatrixXd k(2, 2);
    k << 1.0, 0.5, 0.4, 1.0;
    EXPECT_THROW(krr_predict(k, Eigen::VectorXd::Ones(2), 0.0, k), ArgumentError);
    EXPECT_THROW(krr_predict(Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Ones(3), 0.0, k), ArgumentError);
    EXPECT_THROW(krr_predict(Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Ones(2), -1.0, k), ArgumentError);
}

TEST(Mse, ZeroTargetIsExactlyZero) {
    const MseResult r = empirical_mse(zero_target(32.0, 7), Geometry::full(24), 1, 1, 50, 3);
    EXPECT_EQ(r.mean, 0.0);
    EXPECT_EQ(r.std, 0.0);
    const MseResult r2 = empirical_mse(zero_target(32.0, 7), Geometry::full(24), 40, 3, 50, 3);
    EXPECT_EQ(r2.mean, 0.0);
}

TEST(Mse, DeterministicAcrossThreadCounts) {
    const SpectralProfile p = gap_profile(32.0, 4);
    const Geometry g = Geometry::full(8);
    SimOptions one, many;
    many.threads = 4;
    const MseResult a = empirical_mse(p, g, 25, 6, 100, 42, one);
    const MseResult b = empirical_mse(p, g, 25, 6, 100, 42, many);
    EXPECT_EQ(a.per_trial, b.per_trial);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.std, b.std);
    const MseResult c = empirical_mse(p, g, 25, 6, 100, 43, one);
    EXPECT_NE(a.mean, c.mean);
}

TEST(Mse, FixedTargetOption) {
    const SpectralProfile p = gap_profile(32.0, 3);
    SimOptions fixed;
    fixed.fixed_target = true;
    const MseResult a = empirical_mse(p, Geometry::full(6), 10, 3, 50, 1, fixed);
    const MseResult b = empirical_mse(p, Geometry::full(6), 10, 3, 50, 1);
    EXPECT_NE(a.per_trial, b.per_trial);
}

TEST(Mse, DecreasesWithManySamples) {
    const SpectralProfile p = gap_profile(4.0, 3);
    const Geometry g = Geometry::full(5);
    const double small = empirical_mse(p, g, 3, 5, 400, 8).mean;
    const double large = empirical_mse(p, g, 300, 5, 400, 8).mean;
    EXPECT_LT(large, 0.1 * small);
}

TEST(Mse, QuartilesAndStd) {
    const MseResult r = empirical_mse(gap_profile(8.0, 3), Geometry::full(6), 10, 5, 50, 2);
    std::vector<double> s = r.per_trial;
    std::sort(s.begin(), s.end());
    EXPECT_EQ(r.median, s[2]);
    EXPECT_EQ(r.q25, s[1]);
    EXPECT_EQ(r.q75, s[3]);
    double ss = 0.0;
    for (double v : s) ss += (v - r.mean) * (v - r.mean);
    EXPECT_NEAR(r.std, std::sqrt(ss / 4), 1e-15);
}

TEST(Mse, Preconditions) {
    const SpectralProfile p = gap_profile(8.0, 3);
    EXPECT_THROW(empirical_mse(p, Geometry::full(6), 0, 1, 10, 1), ArgumentError);
    EXPECT_THROW(empirical_mse(p, Geometry::full(6), 5, 0, 10, 1), ArgumentError);
    EXPECT_THROW(empirical_mse(p, Geometry::full(6), 5, 1, 0, 1), ArgumentError);
}

TEST(Ks, QuantileSampleWithinOneOverN) {
    for (double a : {0.5, 2.0}) {
        const MarchenkoPastur mp(a);
        const int n = 200;
        std::vector<double> q;
        for (int i = 0; i < n; ++i) q.push_back(mp_quantile(mp, (i + 0.5) / n));
        EXPECT_LE(ks_distance(q, mp), 1.0 / n + 1e-9) << a;
    }
}

TEST(Ks, AllZerosAgainstAtomLaw) {
    EXPECT_NEAR(ks_distance(std::vector<double>(10, 0.0), MarchenkoPastur(2.0)), 0.5, 1e-12);
}

TEST(Ks, SingleValueAtUpperEdge) {
    // F_n jumps from 0 to 1 at alpha_+, where the law's CDF is already 1.
    const MarchenkoPastur mp(0.5);
    EXPECT_NEAR(ks_distance({mp.alpha_plus}, mp), 1.0, 1e-10);
}

TEST(Ks, Preconditions) {
    EXPECT_THROW(ks_distance({}, MarchenkoPastur(1.0)), ArgumentError);
    EXPECT_THROW(ks_distance({2.0, 1.0}, MarchenkoPastur(1.0)), ArgumentError);
}

TEST(Spectrum, DegreeOneMatchesCovarianceEigenvalues) {
    const Dataset x = sample_sphere(Geometry::full(60), 120, 5);
    const SpectrumResult s = empirical_spectrum(x, 1);
    ASSERT_EQ(s.eigenvalues.size(), 120u);
    EXPECT_EQ(s.n_r, 60u);
    EXPECT_DOUBLE_EQ(s.ratio, 2.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x.x * x.x.transpose(), Eigen::EigenvaluesOnly);
    for (int i = 0; i < 120; ++i) EXPECT_NEAR(s.eigenvalues[static_cast<std::size_t>(i)], es.eigenvalues()(i), 1e-10);
    EXPECT_TRUE(std::is_sorted(s.eigenvalues.begin(), s.eigenvalues.end()));
    EXPECT_GE(s.ks, 0.0);
    EXPECT_LE(s.ks, 1.0);
}

TEST(Spectrum, RankIsAtMostHarmonicDimension) {
    const SpectrumResult s = empirical_spectrum(sample_sphere(Geometry::full(5), 30, 6), 1);
    const auto nonzero = std::count_if(s.eigenvalues.begin(), s.eigenvalues.end(), [](double e) { return e != 0.0; });
    EXPECT_EQ(nonzero, 5);
    const SpectrumResult s2 = empirical_spectrum(sample_sphere(Geometry::full(3), 30, 6), 2);
    EXPECT_EQ(std::count_if(s2.eigenvalues.begin(), s2.eigenvalues.end(), [](double e) { return e != 0.0; }), 5);
}

TEST(Spectrum, TraceIsSampleCount) {
    const SpectrumResult s = empirical_spectrum(sample_sphere(Geometry::full(9), 2, 6), 3);
    ASSERT_EQ(s.eigenvalues.size(), 2u);
    EXPECT_NEAR(s.eigenvalues[0] + s.eigenvalues[1], 2.0, 1e-14);
}

TEST(Spectrum, PatchedRatioUsesScaledDimension) {
    const SpectrumResult s = empirical_spectrum(sample_sphere(Geometry::patched(50, 6), 600, 7), 1);
    EXPECT_EQ(s.n_r, 300u);
    EXPECT_DOUBLE_EQ(s.ratio, 2.0);
    EXPECT_LT(s.ks, 0.15);
}

TEST(Spectrum, Preconditions) {
    EXPECT_THROW(empirical_spectrum(sample_sphere(Geometry::full(5), 1, 1), 1), ArgumentError);
    EXPECT_THROW(empirical_spectrum(sample_sphere(Geometry::full(5), 3, 1), 0), ArgumentError);
}
