#include "test_util.hpp"

#include "trackfuse/error.hpp"
#include "trackfuse/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace trackfuse;
using namespace tftest;

TEST(Rmse, HandComputed)
{
    const std::vector<Vector> e{vec({3.0, 4.0}), vec({0.0, 0.0})};
    EXPECT_NEAR(rmse(e), std::sqrt(12.5), 1e-12);
    EXPECT_DOUBLE_EQ(rmse({}), 0.0);
}

TEST(Nees, AverageMatchesDimensionAndScalesWithCovariance)
{
    Rng rng(3);
    const Matrix p = pair_p1().cov();
    const Eigen::LLT<Matrix> l(p);
    const int n = 20000;
    double avg = 0.0, avg_half = 0.0;
    for (int i = 0; i < n; ++i) {
        const Vector e = l.matrixL() * standard_normal(rng, 2);
        avg += nees(e, p) / n;
        avg_half += nees(e, 0.5 * p) / n;
    }
    EXPECT_NEAR(avg, 2.0, 0.06);
    EXPECT_NEAR(avg_half, 4.0, 0.12);
}

TEST(Nees, Bounds)
{
    const NeesBounds b = nees_bounds(200, 2);
    EXPECT_NEAR(b.lower, 1.73, 0.01);
    EXPECT_NEAR(b.upper, 2.29, 0.01);
    const NeesBounds b4 = nees_bounds(25, 4);
    EXPECT_LT(b4.lower, 4.0);
    EXPECT_GT(b4.upper, 4.0);
}

TEST(Ellipse, IdentityIsCircle)
{
    const GaussianEstimate e(vec({1.0, 2.0}), Matrix::Identity(2, 2));
    const EllipseSummary s = ellipse_from_cov(e);
    EXPECT_NEAR(s.a, 2.0, 2e-3);
    EXPECT_NEAR(s.b, s.a, 1e-12);
    EXPECT_EQ(s.center, Eigen::Vector2d(1.0, 2.0));
    EXPECT_DOUBLE_EQ(s.confidence, 0.865);
}

TEST(Ellipse, AxisAlignedAndRotated)
{
    const GaussianEstimate e(vec({0.0, 0.0}), Matrix(vec({4.0, 1.0}).asDiagonal()));
    const EllipseSummary s = ellipse_from_cov(e);
    EXPECT_NEAR(s.orientation, 0.0, 1e-12);
    EXPECT_NEAR(s.a, 2.0 * s.b, 1e-12);

    const double t = std::numbers::pi / 6.0;
    Matrix r(2, 2);
    r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
    const GaussianEstimate er(vec({0.0, 0.0}), r * e.cov() * r.transpose());
    const EllipseSummary sr = ellipse_from_cov(er);
    EXPECT_NEAR(sr.orientation, t, 1e-9);
    EXPECT_NEAR(sr.a, s.a, 1e-9);
    EXPECT_NEAR(sr.b, s.b, 1e-9);
}

TEST(Ellipse, UsesFirstTwoComponentsOfLargerState)
{
    Matrix p = Matrix::Identity(4, 4);
    p(2, 2) = 100.0;
    const EllipseSummary s = ellipse_from_cov(GaussianEstimate(Vector::Zero(4), p));
    EXPECT_NEAR(s.a, s.b, 1e-12);
}

TEST(Bench, NaiveIsReference)
{
    const auto pairs = random_estimate_pairs(1, 64, 4);
    ASSERT_EQ(pairs.size(), 64U);
    const BenchResult r = bench_fusers(pairs, {Method::naive, Method::ci}, 200, 1);
    ASSERT_EQ(r.relative.size(), 2U);
    EXPECT_DOUBLE_EQ(r.relative[0], 1.0);
    EXPECT_GT(r.median_ns[1], 0.0);
    EXPECT_EQ(r.calls, 200U);
}

TEST(Bench, RandomPairsAreValidAndDeterministic)
{
    const auto a = random_estimate_pairs(5, 10, 3);
    const auto b = random_estimate_pairs(5, 10, 3);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].first.cov(), b[i].first.cov());
        EXPECT_GT(Eigen::SelfAdjointEigenSolver<Matrix>(a[i].second.cov()).eigenvalues().minCoeff(), 0.0);
    }
}
