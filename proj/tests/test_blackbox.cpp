#include <gtest/gtest.h>

#include <array>

#include "support.hpp"

using namespace ttsense;

namespace {

using Mat = std::array<std::array<double, 11>, 11>;

Mat multiply(const Mat& a, const Mat& b) {
    Mat c{};
    for (int i = 0; i < 11; ++i)
        for (int k = 0; k < 11; ++k)
            for (int j = 0; j < 11; ++j) c[i][j] += a[i][k] * b[k][j];
    return c;
}

// m(T) = A^T m(0) with the one-day transition matrix, by repeated squaring.
double decay_by_matrix_power(const std::vector<double>& lambda, int days) {
    Mat a{};
    for (int n = 0; n < 11; ++n) a[n][n] = n < 10 ? 1.0 - lambda[n] : 1.0;
    for (int n = 0; n < 10; ++n) a[n + 1][n] = lambda[n];
    Mat result{};
    for (int n = 0; n < 11; ++n) result[n][n] = 1.0;
    for (int e = days; e > 0; e >>= 1) {
        if (e & 1) result = multiply(a, result);
        a = multiply(a, a);
    }
    return result[10][0];
}

}  // namespace

TEST(SobolG, Examples) {
    EXPECT_EQ(sobol_g(std::vector<double>(5, 0.5), std::vector<double>(5, 0.0)), 0.0);
    EXPECT_EQ(sobol_g(std::vector<double>(3, 0.0), std::vector<double>(3, 0.0)), 8.0);
    EXPECT_DOUBLE_EQ(sobol_g(std::vector<double>{0.25, 0.75}, std::vector<double>{1.0, 2.0}), 1.0);
    EXPECT_THROW(sobol_g(std::vector<double>{1.5}, std::vector<double>{0.0}), DomainError);
    EXPECT_THROW(sobol_g(std::vector<double>{-0.1}, std::vector<double>{0.0}), DomainError);
}

TEST(SobolG, AnalyticIndices) {
    const auto g20 = sobol_g_analytic_indices(20);
    EXPECT_NEAR(g20.first_order, 0.001, 5e-4);
    EXPECT_NEAR(g20.total, 0.251, 5e-4);
    const auto g1 = sobol_g_analytic_indices(1);
    EXPECT_DOUBLE_EQ(g1.first_order, 1.0);
    EXPECT_DOUBLE_EQ(g1.total, 1.0);
    const auto g2 = sobol_g_analytic_indices(2);
    EXPECT_NEAR(g2.first_order, 3.0 / 7.0, 1e-14);
    EXPECT_NEAR(g2.total, 4.0 / 7.0, 1e-14);
}

TEST(SobolG, TwoVariableQuadratureOracle) {
    // fine midpoint grid stands in for the continuous integrals
    const Index I = 400;
    const auto space = oracle::unit_space({I, I});
    std::vector<double> values(I * I);
    const std::vector<double> a{0.0, 0.0};
    for (Index i = 0; i < I; ++i)
        for (Index j = 0; j < I; ++j) {
            const std::vector<double> x{space.axis(0).nodes[i], space.axis(1).nodes[j]};
            values[i * I + j] = sobol_g(x, a);
        }
    const auto anova = oracle::dense_anova(values, {I, I});
    const auto g2 = sobol_g_analytic_indices(2);
    EXPECT_NEAR(anova.sobol[0b10], g2.first_order, 1e-4);
    EXPECT_NEAR(anova.sobol[0b01], g2.first_order, 1e-4);
    EXPECT_NEAR(anova.sobol[0b11] + anova.sobol[0b10], g2.total, 1e-4);
}

TEST(DecayChain, TrivialCases) {
    const std::vector<double> zero(10, 0.0), one(10, 1.0);
    EXPECT_EQ(decay_chain(zero, 1), 0.0);
    EXPECT_EQ(decay_chain(zero, 730), 0.0);
    EXPECT_EQ(decay_chain(one, 10), 1.0);
    EXPECT_EQ(decay_chain(one, 25), 1.0);
    EXPECT_EQ(decay_chain(one, 9), 0.0);
    EXPECT_THROW(decay_chain(std::vector<double>(10, 1.5), 5), DomainError);
    EXPECT_THROW(decay_chain(std::vector<double>(9, 0.1), 5), ShapeError);
}

TEST(DecayChain, MatrixPowerOracle) {
    const std::vector<double> equal(10, 0.00378);
    const double v = decay_chain(equal, 730);
    EXPECT_GT(v, 0.0);
    EXPECT_NEAR(v, decay_by_matrix_power(equal, 730), 1e-12);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(kDecayLambdaMin, kDecayLambdaMax);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> l(10);
        for (double& x : l) x = u(rng);
        EXPECT_NEAR(decay_chain(l, 730), decay_by_matrix_power(l, 730), 1e-12);
    }
}

TEST(DecayChain, MassConserved) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> l(10);
    for (double& x : l) x = u(rng);
    for (int days : {1, 5, 50, 730}) {
        const auto m = decay_chain_state(l, days);
        double s = 0.0;
        for (double x : m) s += x;
        EXPECT_NEAR(s, 1.0, 1e-12);
    }
}

TEST(DecayChain, SpaceMatchesRange) {
    const auto s = decay_chain_space(100);
    EXPECT_EQ(s.dimension(), 10u);
    EXPECT_GT(s.axis(0).nodes.front(), kDecayLambdaMin);
    EXPECT_LT(s.axis(0).nodes.back(), kDecayLambdaMax);
}

TEST(Evaluator, BatchCountsAndShape) {
    const auto f = sobol_g_evaluator(std::vector<double>(3, 0.0));
    RowMatrix x(4, 3);
    x.setConstant(0.25);
    const auto y = f.evaluate_batch(x);
    ASSERT_EQ(y.size(), 4u);
    for (double v : y) EXPECT_DOUBLE_EQ(v, 1.0);
    EXPECT_EQ(f.eval_count(), 4u);
    const auto copy = f;
    copy.evaluate_batch(x);
    EXPECT_EQ(f.eval_count(), 8u);
    EXPECT_THROW(f.evaluate_batch(RowMatrix(2, 2)), ShapeError);
    EXPECT_EQ(f.evaluate_batch(RowMatrix(0, 3)).size(), 0u);
}

TEST(Evaluator, ThreadsDoNotChangeResults) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(kDecayLambdaMin, kDecayLambdaMax);
    RowMatrix x(101, 10);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
    const auto serial = decay_chain_evaluator(730, 1).evaluate_batch(x);
    const auto parallel = decay_chain_evaluator(730, 4).evaluate_batch(x);
    EXPECT_EQ(serial, parallel);
}

TEST(Evaluator, ErrorsPropagate) {
    const auto f = sobol_g_evaluator(std::vector<double>(2, 0.0), 3);
    RowMatrix x(6, 2);
    x.setConstant(0.5);
    x(4, 1) = 2.0;
    EXPECT_THROW(f.evaluate_batch(x), DomainError);
}
