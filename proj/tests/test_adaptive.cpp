#include <adalasso/adaptive.hpp>
#include <adalasso/synth.hpp>

#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace adalasso;

TEST(FitInitial, FormulaValue)
{
    RandomStream rng(1, 0);
    RegressionProblem pr;
    pr.X = testutil::gaussian(100, 100, rng);
    pr.y = Vector::Zero(100);
    pr.sigma_eps = 1.0;
    AdaptiveConfig c;
    const InitialFit f = fit_initial(pr, c);
    // sqrt(24 * log(100) / 100)
    EXPECT_NEAR(f.lambda_init, std::sqrt(24.0 * std::log(100.0) / 100.0), 1e-12);
    EXPECT_NEAR(f.lambda_init, 1.0513, 1e-4);
    EXPECT_TRUE(f.beta_init.isZero(0.0));
}

TEST(FitInitial, OverrideAndMissingSigma)
{
    RandomStream rng(2, 0);
    RegressionProblem pr;
    pr.X = testutil::gaussian(30, 10, rng);
    pr.y = pr.X.col(0);
    AdaptiveConfig c;
    EXPECT_THROW(fit_initial(pr, c), MissingQuantity);
    c.lambda_init = 0.3;
    EXPECT_EQ(fit_initial(pr, c).lambda_init, 0.3);
}

TEST(ComputeWeights, Examples)
{
    Vector b(2);
    b << 2.0, 0.5;
    WeightVector w = compute_weights(b);
    EXPECT_EQ(w[0], 1.0);
    EXPECT_EQ(w[1], 2.0);
    b << 1.0, 1.0;
    w = compute_weights(b);
    EXPECT_EQ(w[0], 1.0);
    EXPECT_EQ(w[1], 1.0);
    b << 0.1, 0.0;
    w = compute_weights(b);
    EXPECT_DOUBLE_EQ(w[0], 10.0);
    EXPECT_EQ(w[1], kInf);
}

TEST(ComputeWeights, ScaledInputFollowsFormula)
{
    RandomStream rng(3, 0);
    for (int t = 0; t < 100; ++t) {
        Vector b(5);
        for (Index j = 0; j < 5; ++j) b[j] = rng.uniform() < 0.2 ? 0.0 : 3.0 * rng.normal();
        const double c = 0.1 + 5.0 * rng.uniform();
        const WeightVector w = compute_weights(c * b);
        for (Index j = 0; j < 5; ++j) {
            if (b[j] == 0.0) EXPECT_EQ(w[j], kInf);
            else EXPECT_DOUBLE_EQ(w[j], std::max(1.0 / std::abs(c * b[j]), 1.0));
        }
    }
}

TEST(ThresholdSupport, Examples)
{
    Vector b(3);
    b << 0.5, 0.3, 0.05;
    EXPECT_EQ(threshold_support(b, 0.1), (IndexSet{0}));
    EXPECT_TRUE(threshold_support(Vector::Zero(3), 0.1).empty());
    Vector tie(1);
    tie << 0.4;
    EXPECT_TRUE(threshold_support(tie, 0.1).empty());
    EXPECT_THROW(threshold_support(b, 0.0), InvalidArgument);
}

TEST(LambdaRange, RatioAndCollapse)
{
    Constants c;
    c.eta = 0.5;
    c.M = 16.0;
    const LambdaRange r = lambda_n_range(4, 1.0, c, 0.7, 0.3, 100, 200, 4);
    EXPECT_NEAR(r.lo / r.hi, 0.5, 1e-14);
    EXPECT_FALSE(r.degenerate);

    // M = 4K/eta collapses the range to a point.
    c.M = 4.0 * 2.0 / 0.5;
    const LambdaRange point = lambda_n_range(3, 2.0, c, 1.0, 0.2, 50, 100, 3);
    EXPECT_NEAR(point.lo, point.hi, 1e-12 * point.hi);

    c.M = 8.0;
    c.eta = 0.1; // 4K/eta = 40 > M
    EXPECT_TRUE(lambda_n_range(1, 1.0, c, 1.0, 0.2, 50, 100, 1).degenerate);

    EXPECT_THROW(lambda_n_range(0, 1.0, c, 1.0, 0.2, 50, 100, 1), InvalidArgument);
    EXPECT_THROW(lambda_n_range(1, 0.0, c, 1.0, 0.2, 50, 100, 1), InvalidArgument);
    EXPECT_THROW(lambda_n_range(1, 1.0, c, 1.0, 0.2, 5, 100, 4), InvalidArgument);
}

TEST(LambdaRange, FormulaValue)
{
    Constants c;
    c.eta = 0.5;
    c.M = 8.0;
    c.c0 = 1.0;
    const double sigma = 0.5, li = 0.2, K = 1.5;
    const Index s = 3, p = 50, n = 100;
    const double common = sigma * li * std::sqrt(3.0) * std::sqrt(2.0 * std::log(47.0) / 100.0);
    const LambdaRange r = lambda_n_range(s, K, c, sigma, li, p, n, s);
    EXPECT_NEAR(r.lo, 64.0 * K * K / 0.5 * common, 1e-12);
    EXPECT_NEAR(r.hi, 16.0 * 8.0 * K * common, 1e-12);
}

TEST(AdaptiveLasso, OrthonormalNoiseless)
{
    RandomStream rng(4, 0);
    RegressionProblem pr;
    const Index n = 50, p = 10;
    pr.X = testutil::orthonormal_design(n, p, rng);
    Vector beta = Vector::Zero(p);
    beta[0] = 5.0;
    pr.y = pr.X * beta;
    pr.sigma_eps = 0.0;
    AdaptiveConfig c;
    c.lambda_init = 0.5;
    c.lambda_n = 0.5;
    const AdaptiveTrace t = adaptive_lasso(pr, c);
    EXPECT_NEAR(t.beta_init[0], 5.0 - 0.5, 1e-10);
    for (Index j = 1; j < p; ++j) EXPECT_EQ(t.weights[j], kInf);
    EXPECT_EQ(t.weights[0], 1.0);
    EXPECT_EQ(t.final.support, (IndexSet{0}));
    EXPECT_NEAR(t.final.beta_hat[0], 4.5, 1e-10);
    EXPECT_EQ(t.s_bar_set, (IndexSet{0}));
}

TEST(AdaptiveLasso, ZeroResponse)
{
    RandomStream rng(5, 0);
    RegressionProblem pr;
    pr.X = testutil::gaussian(40, 20, rng);
    pr.y = Vector::Zero(40);
    pr.sigma_eps = 1.0;
    AdaptiveConfig c;
    c.K = 1.0;
    const AdaptiveTrace t = adaptive_lasso(pr, c);
    EXPECT_TRUE(t.final.beta_hat.isZero(0.0));
    EXPECT_TRUE(t.s_bar_set.empty());
    EXPECT_EQ(t.s_bar, 0);
}

TEST(AdaptiveLasso, StageConsistencyAndExclusion)
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Matrix X = gen_random_design(CovarianceSpec::toeplitz(40, 0.3), 80, seed);
        SignalSpec sig;
        sig.s = 3;
        sig.beta_min = 1.0;
        const RegressionProblem pr = gen_problem(X, sig, 0.5, seed);
        AdaptiveConfig c;
        c.constants.B = 0.5;
        c.K = 1.0;
        const AdaptiveTrace t = adaptive_lasso(pr, c);
        const WeightVector w = compute_weights(t.beta_init);
        for (Index j = 0; j < 40; ++j) EXPECT_EQ(t.weights[j], w[j]);
        EXPECT_EQ(t.s_bar_set, threshold_support(t.beta_init, t.lambda_init_used));
        EXPECT_EQ(t.s_bar, static_cast<Index>(t.s_bar_set.size()));
        for (Index j = 0; j < 40; ++j) {
            if (t.beta_init[j] == 0.0) {
                EXPECT_EQ(t.final.beta_hat[j], 0.0);
            }
        }
        ASSERT_TRUE(t.lambda_n_range);
        if (!t.lambda_n_range->degenerate) {
            EXPECT_GE(t.lambda_n_used, t.lambda_n_range->lo);
            EXPECT_LE(t.lambda_n_used, t.lambda_n_range->hi);
        }
    }
}

TEST(AdaptiveLasso, PositionInterpolates)
{
    const Matrix X = gen_random_design(CovarianceSpec::identity(20), 60, 7);
    SignalSpec sig;
    sig.s = 2;
    const RegressionProblem pr = gen_problem(X, sig, 0.3, 7);
    AdaptiveConfig c;
    c.K = 1.0;
    c.constants.B = 0.5;
    c.lambda_n_position = 1.0;
    const AdaptiveTrace hi = adaptive_lasso(pr, c);
    EXPECT_DOUBLE_EQ(hi.lambda_n_used, hi.lambda_n_range->hi);
    c.lambda_n_position = 0.0;
    const AdaptiveTrace lo = adaptive_lasso(pr, c);
    EXPECT_DOUBLE_EQ(lo.lambda_n_used, lo.lambda_n_range->lo);
    c.lambda_n_position = 1.5;
    EXPECT_THROW(adaptive_lasso(pr, c), InvalidArgument);
}

TEST(AdaptiveLasso, DegenerateRangeUsesLowerEndpoint)
{
    const Matrix X = gen_random_design(CovarianceSpec::identity(20), 60, 8);
    SignalSpec sig;
    sig.s = 2;
    const RegressionProblem pr = gen_problem(X, sig, 0.3, 8);
    AdaptiveConfig c;
    c.K = 3.0; // 4K/eta = 24 > M = 8
    c.constants.B = 0.5;
    c.lambda_n_position = 0.7;
    const AdaptiveTrace t = adaptive_lasso(pr, c);
    ASSERT_TRUE(t.lambda_n_range->degenerate);
    EXPECT_EQ(t.lambda_n_used, t.lambda_n_range->lo);
    EXPECT_FALSE(t.notes.empty());
}

TEST(AdaptiveLasso, WitnessedKDefault)
{
    const Matrix X = gen_random_design(CovarianceSpec::identity(12), 80, 9);
    SignalSpec sig;
    sig.s = 2;
    sig.beta_min = 2.0;
    const RegressionProblem pr = gen_problem(X, sig, 0.2, 9);
    AdaptiveConfig c;
    c.constants.B = 1.0;
    c.re_budget = 2;
    c.re_options.iterations = 30;
    const AdaptiveTrace t = adaptive_lasso(pr, c);
    EXPECT_EQ(t.K_source, "witnessed");
    EXPECT_GE(t.K_used, 1.0);
}

TEST(AdaptiveLasso, NullModelMonteCarlo)
{
    // beta* = 0, p = 100: with literal constants the final support is empty in
    // at least 1 - 2/p^2 of draws; 1000 draws allow at most a handful of misses.
    const Index n = 100, p = 100;
    int empty = 0;
    const int reps = 1000;
    const Matrix X = gen_random_design(CovarianceSpec::identity(p), n, 11);
    for (int r = 0; r < reps; ++r) {
        SignalSpec sig;
        sig.s = 0;
        const RegressionProblem pr = gen_problem(X, sig, 1.0, 1000 + r);
        AdaptiveConfig c;
        c.K = 1.0;
        const AdaptiveTrace t = adaptive_lasso(pr, c);
        empty += t.final.support.empty();
    }
    EXPECT_GE(empty, reps - 2);
}
