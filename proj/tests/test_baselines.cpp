#include <gtest/gtest.h>

#include "support.hpp"

using namespace ttsense;

TEST(BruteForce, MatchesDenseOracle) {
    std::mt19937_64 rng(503);
    for (int trial = 0; trial < 6; ++trial) {
        const std::vector<Index> sizes(3 + trial % 3, 4 + trial % 2);
        const auto t = random_tt(sizes, 2, rng);
        const auto grid = oracle::naive_full(t);
        const auto expect = oracle::dense_anova(grid, sizes);
        const auto a = brute_force_anova_from_grid(grid, oracle::unit_space(sizes));
        EXPECT_NEAR(a.mean, expect.mean, 1e-12);
        EXPECT_NEAR(a.total_variance, expect.variance, 1e-12 * expect.variance);
        for (Index k = 1; k < expect.sobol.size(); ++k) {
            EXPECT_NEAR(a.indices[k], expect.sobol[k], 1e-10);
            EXPECT_NEAR(a.closed_variances[k] / a.total_variance, expect.closed[k], 1e-10);
        }
    }
}

TEST(BruteForce, AgreesWithSurrogatePipeline) {
    const auto space = sobol_g_space(4, 8);
    const auto f = sobol_g_evaluator(std::vector<double>(4, 0.0));
    const auto bf = brute_force_metrics(brute_force_anova(f, space), 0.05);
    const auto s = build_sobol_tt(tt_cross(f, space, CrossConfig{}).tensor, space);
    const auto r = full_report(s);
    EXPECT_NEAR(bf.mean_dimension, r.mean_dimension, 1e-8);
    EXPECT_EQ(bf.superposition, r.superposition.dimension);
    EXPECT_EQ(bf.truncation, r.truncation.dimension);
    EXPECT_NEAR(bf.truncation_achieved, r.truncation.achieved, 1e-8);
    EXPECT_EQ(bf.successive, r.successive.dimension);
    for (Index n = 0; n < 4; ++n) {
        EXPECT_NEAR(bf.shapley[n], r.shapley[n], 1e-8);
        EXPECT_NEAR(bf.totals[n], r.totals[n], 1e-8);
        EXPECT_NEAR(bf.first_order[n], r.first_order[n], 1e-8);
    }
}

TEST(BruteForce, AdditiveShapleyEqualsFirstOrder) {
    const auto space = oracle::unit_space({5, 5, 5});
    const auto f = EvaluatorHandle::from_point_function(3, [](std::span<const double> x) { return x[0] + 2 * x[1] - x[2]; });
    const auto m = brute_force_metrics(brute_force_anova(f, space), 0.05);
    EXPECT_NEAR(m.mean_dimension, 1.0, 1e-12);
    for (Index n = 0; n < 3; ++n) EXPECT_NEAR(m.shapley[n], m.first_order[n], 1e-12);
    EXPECT_NEAR(m.first_order[1], 4.0 / 6.0, 1e-12);
}

TEST(BruteForce, RejectsLargeOrder) {
    const auto space = sobol_g_space(13, 2);
    EXPECT_THROW(brute_force_anova(sobol_g_evaluator(std::vector<double>(13, 0.0)), space), ResourceError);
}

TEST(Saltelli, CloseToGridTruth) {
    const auto space = sobol_g_space(3, 20);
    const auto f = sobol_g_evaluator(std::vector<double>(3, 0.0));
    const auto truth = brute_force_metrics(brute_force_anova(f, space), 0.05);
    const auto est = saltelli_estimate(f, space, 8192, 11);
    EXPECT_FALSE(est.degenerate);
    EXPECT_EQ(est.evaluations, 8192u * 5);
    for (Index n = 0; n < 3; ++n) {
        EXPECT_NEAR(est.first_order[n], truth.first_order[n], 4 * est.first_order_se[n] + 0.01);
        EXPECT_NEAR(est.totals[n], truth.totals[n], 4 * est.totals_se[n] + 0.01);
        EXPECT_GT(est.first_order_se[n], 0.0);
    }
}

TEST(Saltelli, DeterministicAndValidated) {
    const auto space = sobol_g_space(3, 10);
    const auto f = sobol_g_evaluator(std::vector<double>(3, 0.0));
    const auto a = saltelli_estimate(f, space, 256, 3, 20);
    const auto b = saltelli_estimate(f, space, 256, 3, 20);
    EXPECT_EQ(a.first_order, b.first_order);
    EXPECT_EQ(a.totals_se, b.totals_se);
    EXPECT_THROW(saltelli_estimate(f, space, 32, 3), DomainError);
    const auto flat = EvaluatorHandle::from_point_function(3, [](std::span<const double>) { return 2.0; });
    EXPECT_TRUE(saltelli_estimate(flat, space, 128, 3, 10).degenerate);
}

TEST(ShapleyMC, SumsToOneAndDeterministic) {
    const auto space = sobol_g_space(4, 10);
    const auto f = sobol_g_evaluator({0.0, 1.0, 4.0, 9.0});
    const auto a = shapley_permutation_estimate(f, space, 300, 3, 7);
    const auto b = shapley_permutation_estimate(f, space, 300, 3, 7);
    EXPECT_EQ(a.values, b.values);
    double sum = 0.0;
    for (double v : a.values) sum += v;
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_EQ(a.evaluations, 300u * 4 * 3);
    // the a = 0 variable dominates the a = 9 one
    EXPECT_GT(a.values[0], a.values[3]);
}

TEST(ShapleyMC, AgreesWithExactValues) {
    const auto space = sobol_g_space(3, 12);
    const auto f = sobol_g_evaluator({0.0, 0.5, 2.0});
    const auto exact = brute_force_metrics(brute_force_anova(f, space), 0.05);
    const auto est = shapley_permutation_estimate(f, space, 6000, 4, 13);
    for (Index n = 0; n < 3; ++n) EXPECT_NEAR(est.values[n], exact.shapley[n], 5 * est.standard_errors[n] + 0.01);
}

TEST(ShapleyMC, Validates) {
    const auto space = sobol_g_space(3, 5);
    const auto f = sobol_g_evaluator(std::vector<double>(3, 0.0));
    EXPECT_THROW(shapley_permutation_estimate(f, space, 10, 1, 0), DomainError);
    EXPECT_THROW(shapley_permutation_estimate(f, space, 0, 3, 0), DomainError);
    EXPECT_THROW(shapley_permutation_estimate(sobol_g_evaluator({0.0}), space, 10, 3, 0), ShapeError);
}
