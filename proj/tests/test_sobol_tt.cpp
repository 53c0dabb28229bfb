#include <gtest/gtest.h>

#include "support.hpp"

using namespace ttsense;

namespace {

struct Instance {
    TTTensor surrogate;
    ModelSpace space;
    oracle::DenseANOVA anova;
};

Instance random_instance(std::mt19937_64& rng, Index N, Index I, Index rank) {
    const std::vector<Index> sizes(N, I);
    TTTensor t = random_tt(sizes, rank, rng);
    ModelSpace space = oracle::unit_space(sizes);
    auto anova = oracle::dense_anova(oracle::naive_full(t), sizes);
    return {std::move(t), std::move(space), std::move(anova)};
}

// Flat binary tuple id (variable 0 most significant) to its variable list.
std::vector<Index> vars_of(Index flat, Index N) {
    std::vector<Index> v;
    for (Index n = 0; n < N; ++n)
        if ((flat >> (N - 1 - n)) & 1) v.push_back(n);
    return v;
}

}  // namespace

TEST(SobolTT, AdditiveModel) {
    const auto space = oracle::unit_space({8, 8});
    // f = x1 + x2 on the grid, as an exact rank-2 TT
    std::vector<double> values(64);
    for (Index i = 0; i < 8; ++i)
        for (Index j = 0; j < 8; ++j) values[i * 8 + j] = space.axis(0).nodes[i] + space.axis(1).nodes[j];
    const auto s = build_sobol_tt(from_dense(values, {8, 8}), space);
    EXPECT_NEAR(query_index(s, {0}), 0.5, 1e-10);
    EXPECT_NEAR(query_index(s, {1}), 0.5, 1e-10);
    EXPECT_NEAR(query_index(s, {0, 1}), 0.0, 1e-10);
    EXPECT_NEAR(closed_index(s, {0}), 0.5, 1e-10);
    EXPECT_NEAR(closed_index(s, {0, 1}), 1.0, 1e-10);
    EXPECT_NEAR(s.mean, 1.0, 1e-12);
    EXPECT_EQ(query_index(s, {}), 0.0);
}

TEST(SobolTT, MatchesDenseOracleN5) {
    std::mt19937_64 rng(211);
    const auto inst = random_instance(rng, 5, 6, 2);
    const auto s = build_sobol_tt(inst.surrogate, inst.space);
    const auto closed = closed_tt(s);
    EXPECT_NEAR(s.mean, inst.anova.mean, 1e-12 * std::max(1.0, std::abs(inst.anova.mean)));
    EXPECT_NEAR(s.variance, inst.anova.variance, 1e-10 * inst.anova.variance);
    for (Index t = 1; t < 32; ++t) {
        const auto vars = vars_of(t, 5);
        EXPECT_NEAR(query_index(s, vars), inst.anova.sobol[t], 1e-10) << "tuple " << t;
        EXPECT_NEAR(closed_index(closed, vars), inst.anova.closed[t], 1e-10) << "tuple " << t;
        // total: sum over tuples intersecting vars
        double total = 0.0;
        for (Index u = 1; u < 32; ++u)
            if (u & t) total += inst.anova.sobol[u];
        EXPECT_NEAR(total_index(closed, vars), total, 1e-10) << "tuple " << t;
    }
}

TEST(SobolTT, OracleEquivalenceSmallModels) {
    std::mt19937_64 rng(223);
    for (int trial = 0; trial < 12; ++trial) {
        const Index N = 2 + trial % 5;  // 2..6
        const Index I = 3 + trial % 3;
        const auto inst = random_instance(rng, N, I, 1 + trial % 3);
        const auto s = build_sobol_tt(inst.surrogate, inst.space);
        const auto dense = full(s.tensor);
        for (Index t = 1; t < (Index{1} << N); ++t) EXPECT_NEAR(dense[t], inst.anova.sobol[t], 1e-10);
        EXPECT_NEAR(dense[0], 0.0, 1e-9);
    }
}

TEST(SobolTT, Invariants) {
    std::mt19937_64 rng(227);
    for (int trial = 0; trial < 8; ++trial) {
        const auto inst = random_instance(rng, 6, 4, 3);
        const auto s = build_sobol_tt(inst.surrogate, inst.space);
        const auto closed = closed_tt(s);
        EXPECT_NEAR(dot(s.tensor, TTTensor::ones(s.tensor.mode_sizes())), 1.0, 1e-6);
        EXPECT_NEAR(evaluate(s.tensor, MultiIndex(6, 0)), 0.0, 1e-9);
        const auto dense = full(s.tensor);
        const double top = *std::max_element(dense.begin(), dense.end());
        for (Index t = 1; t < 64; ++t) {
            EXPECT_GE(dense[t], -1e-9 * top);
            const auto vars = vars_of(t, 6);
            const double a = dense[t];
            const double c = closed_index(closed, vars);
            const double tot = total_index(closed, vars);
            EXPECT_LE(a, c + 1e-8);
            EXPECT_LE(c, tot + 1e-8);
            EXPECT_LE(tot, 1.0 + 1e-8);
        }
        EXPECT_NEAR(closed_index(closed, {0, 1, 2, 3, 4, 5}), 1.0, 1e-6);
        EXPECT_EQ(total_index(closed, {0, 1, 2, 3, 4, 5}), 1.0);
    }
}

TEST(SobolTT, BinaryIndexLayout) {
    // tuple {4, 7} of seven variables (1-based) sets bits 3 and 6
    EXPECT_EQ(binary_index(7, {3, 6}), (MultiIndex{0, 0, 0, 1, 0, 0, 1}));
    EXPECT_EQ(tuple_of({0, 1, 1}), (std::vector<Index>{1, 2}));
    EXPECT_EQ(complement_of(4, {1, 3}), (std::vector<Index>{0, 2}));
    EXPECT_THROW(binary_index(3, {3}), RangeError);
}

TEST(SobolTT, Errors) {
    const auto space = oracle::unit_space({4, 4});
    EXPECT_THROW(build_sobol_tt(TTTensor::constant({4, 4}, 3.0), space), DegenerateModelError);
    EXPECT_THROW(build_sobol_tt(TTTensor::ones({4, 5}), space), ShapeError);
    std::mt19937_64 rng(5);
    const auto s = build_sobol_tt(random_tt({4, 4}, 2, rng), space);
    EXPECT_THROW(total_index(s, {}), DomainError);
    EXPECT_THROW(query_index(s, {2}), RangeError);
}

TEST(SobolTT, SingleVariable) {
    const auto space = oracle::unit_space({5});
    const auto s = build_sobol_tt(TTTensor::rank1({{1, 2, 3, 4, 9}}), space);
    EXPECT_NEAR(query_index(s, {0}), 1.0, 1e-12);
    EXPECT_NEAR(total_index(s, {0}), 1.0, 1e-12);
}

TEST(SobolTT, SupersetTransformSumsContainingTuples) {
    std::mt19937_64 rng(229);
    const auto t = random_tt({2, 2, 2, 2}, 2, rng);
    const auto dense = oracle::naive_full(t);
    const auto up = full(superset_transform(t));
    for (Index a = 0; a < 16; ++a) {
        double expected = 0.0;
        for (Index b = 0; b < 16; ++b)
            if ((b & a) == a) expected += dense[b];
        EXPECT_NEAR(up[a], expected, 1e-12);
    }
}

TEST(SobolIO, SaveLoadRoundTrip) {
    std::mt19937_64 rng(233);
    const auto inst = random_instance(rng, 3, 4, 2);
    const auto s = build_sobol_tt(inst.surrogate, inst.space);
    const std::string path = ::testing::TempDir() + "sobol_roundtrip.tt";
    save_sobol_tt(path, s);
    const auto back = load_sobol_tt(path);
    EXPECT_EQ(back.tensor, s.tensor);
    EXPECT_EQ(back.mean, s.mean);
    EXPECT_EQ(back.variance, s.variance);
    EXPECT_EQ(back.names, s.names);
}
