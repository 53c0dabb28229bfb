#pragma once

// Reference computations that do not go through tensor trains:
//  - exact ANOVA of the full grid tensor (closed variances + Moebius inversion)
//    and every metric derived from it by enumeration over all 2^N tuples;
//  - Saltelli/Jansen quasi-Monte Carlo first-order and total indices;
//  - random-permutation Shapley estimation.
//
// Tuple tables are indexed by the binary flat index of alpha with variable 0
// as the most significant bit, the same order as full() of a Sobol TT.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <boost/random/sobol.hpp>

#include "ttsense/blackbox.hpp"
#include "ttsense/errors.hpp"
#include "ttsense/model_space.hpp"
#include "ttsense/tt_tensor.hpp"

namespace ttsense {

inline constexpr Index kBruteForceMaxOrder = 12;
inline constexpr Index kBruteForceGridCap = Index{1} << 22;

struct BruteForceANOVA {
    Index order = 0;
    /// V^C_alpha = Var[E[f | x_alpha]] per tuple.
    std::vector<double> closed_variances;
    /// S_alpha per tuple; S at the empty tuple is 0.
    std::vector<double> indices;
    double total_variance = 0.0;
    double mean = 0.0;
};

/// Bit mask of variable n in the flat tuple index.
inline std::uint64_t variable_bit(Index N, Index n) { return std::uint64_t{1} << (N - 1 - n); }

inline std::vector<Index> tuple_of_flat(Index N, std::uint64_t flat) {
    std::vector<Index> vars;
    for (Index n = 0; n < N; ++n)
        if (flat & variable_bit(N, n)) vars.push_back(n);
    return vars;
}

namespace detail {

// Depth-first marginalisation of the centered grid: `t` is E[f - mean | kept
// variables among 0..k-1, all of k..N-1], stored row-major over the kept axes
// followed by axes k..N-1.
inline void closed_variance_dfs(const std::vector<double>& t, const std::vector<Index>& shape,
                                const std::vector<const std::vector<double>*>& weights, Index k,
                                std::uint64_t mask, Index N, std::vector<double>& out) {
    if (k == N) {
        // Weighted second moment over the kept axes.
        double acc = 0.0;
        std::vector<Index> idx(shape.size(), 0);
        for (Index flat = 0; flat < t.size(); ++flat) {
            double w = 1.0;
            for (Index a = 0; a < shape.size(); ++a) w *= (*weights[a])[idx[a]];
            acc += w * t[flat] * t[flat];
            for (Index a = shape.size(); a-- > 0;) {
                if (++idx[a] < shape[a]) break;
                idx[a] = 0;
            }
        }
        out[mask] = acc;
        return;
    }
    const Index axis = shape.size() - (N - k);  // position of variable k within `shape`
    // Keep variable k.
    closed_variance_dfs(t, shape, weights, k + 1, mask | variable_bit(N, k), N, out);
    // Average variable k out.
    Index outer = 1;
    for (Index a = 0; a < axis; ++a) outer *= shape[a];
    Index inner = 1;
    for (Index a = axis + 1; a < shape.size(); ++a) inner *= shape[a];
    const Index size = shape[axis];
    const auto& w = *weights[axis];
    std::vector<double> reduced(outer * inner, 0.0);
    for (Index o = 0; o < outer; ++o)
        for (Index i = 0; i < size; ++i) {
            const double wi = w[i];
            const double* src = t.data() + (o * size + i) * inner;
            double* dst = reduced.data() + o * inner;
            for (Index j = 0; j < inner; ++j) dst[j] += wi * src[j];
        }
    std::vector<Index> reduced_shape = shape;
    reduced_shape.erase(reduced_shape.begin() + static_cast<std::ptrdiff_t>(axis));
    auto reduced_weights = weights;
    reduced_weights.erase(reduced_weights.begin() + static_cast<std::ptrdiff_t>(axis));
    closed_variance_dfs(reduced, reduced_shape, reduced_weights, k + 1, mask, N, out);
}

}  // namespace detail

/// Exact discrete ANOVA of a row-major grid tensor under the space's weights.
inline BruteForceANOVA brute_force_anova_from_grid(const std::vector<double>& grid, const ModelSpace& space) {
    const Index N = space.dimension();
    if (N > kBruteForceMaxOrder) throw ResourceError("brute_force_anova: at most 12 variables are supported");
    const auto shape = space.sizes();
    Index total = 1;
    for (Index s : shape) total *= s;
    if (grid.size() != total) throw ShapeError("brute_force_anova: grid size does not match the space");

    std::vector<const std::vector<double>*> weights;
    for (const auto& axis : space.axes()) weights.push_back(&axis.weights);
    // Mean by full marginalisation.
    double mean = 0.0;
    {
        std::vector<Index> idx(N, 0);
        for (Index flat = 0; flat < total; ++flat) {
            double w = 1.0;
            for (Index n = 0; n < N; ++n) w *= (*weights[n])[idx[n]];
            mean += w * grid[flat];
            for (Index n = N; n-- > 0;) {
                if (++idx[n] < shape[n]) break;
                idx[n] = 0;
            }
        }
    }
    BruteForceANOVA r;
    r.order = N;
    r.mean = mean;
    const Index tuples = Index{1} << N;
    r.closed_variances.assign(tuples, 0.0);
    std::vector<double> centered(grid);
    for (double& v : centered) v -= mean;
    detail::closed_variance_dfs(centered, shape, weights, 0, 0, N, r.closed_variances);
    r.closed_variances[0] = 0.0;
    r.total_variance = r.closed_variances[tuples - 1];
    if (!(r.total_variance > 0.0)) throw DegenerateModelError("brute_force_anova: model output has zero variance");

    // Moebius inversion over the subset lattice.
    r.indices = r.closed_variances;
    for (Index b = 0; b < N; ++b) {
        const std::uint64_t bit = std::uint64_t{1} << b;
        for (std::uint64_t m = 0; m < tuples; ++m)
            if (m & bit) r.indices[m] -= r.indices[m ^ bit];
    }
    for (double& v : r.indices) v /= r.total_variance;
    r.indices[0] = 0.0;
    return r;
}

/// Evaluates `f` on every grid point (row-major, last variable fastest).
inline std::vector<double> evaluate_grid(const EvaluatorHandle& f, const ModelSpace& space,
                                         Index cap = kBruteForceGridCap, Index chunk = 1 << 16) {
    const auto shape = space.sizes();
    const Index N = shape.size();
    Index total = 1;
    for (Index s : shape) {
        if (total > cap / s) throw ResourceError("evaluate_grid: grid exceeds the cap");
        total *= s;
    }
    std::vector<double> grid(total);
    std::vector<Index> idx(N, 0);
    for (Index start = 0; start < total; start += chunk) {
        const Index rows = std::min(chunk, total - start);
        RowMatrix x(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(N));
        for (Index m = 0; m < rows; ++m) {
            for (Index n = 0; n < N; ++n) {
                x(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) = space.axis(n).nodes[idx[n]];
            }
            for (Index n = N; n-- > 0;) {
                if (++idx[n] < shape[n]) break;
                idx[n] = 0;
            }
        }
        const auto values = f.evaluate_batch(x);
        for (Index m = 0; m < rows; ++m) {
            if (!std::isfinite(values[m])) throw DataError("evaluate_grid: model returned a non-finite value");
            grid[start + m] = values[m];
        }
    }
    return grid;
}

inline BruteForceANOVA brute_force_anova(const EvaluatorHandle& f, const ModelSpace& space) {
    if (space.dimension() > kBruteForceMaxOrder) {
        throw ResourceError("brute_force_anova: at most 12 variables are supported");
    }
    return brute_force_anova_from_grid(evaluate_grid(f, space), space);
}

/// Every metric of the TT pipeline, by enumeration over the ANOVA table.
struct BruteForceMetrics {
    std::vector<double> closed;      // S^C per tuple
    std::vector<double> first_order;  // S_n
    std::vector<double> totals;       // S^T_n
    double mean_dimension = 0.0;
    std::vector<double> dimension_distribution;  // 0..N
    std::vector<double> length_spectrum;         // 0..N
    Index superposition = 0;
    double superposition_achieved = 0.0;
    Index truncation = 0;
    double truncation_achieved = 0.0;
    std::vector<Index> truncation_tuple;
    std::vector<double> truncation_profile;  // v(1..N)
    Index successive = 0;
    double successive_achieved = 0.0;
    std::vector<double> shapley;
};

/// Length (last - first + 1) of the tuple at `flat`; 0 for the empty tuple.
inline Index tuple_length(Index N, std::uint64_t flat) {
    const auto vars = tuple_of_flat(N, flat);
    return vars.empty() ? 0 : vars.back() - vars.front() + 1;
}

inline BruteForceMetrics brute_force_metrics(const BruteForceANOVA& a, double eps) {
    const Index N = a.order;
    const std::uint64_t tuples = std::uint64_t{1} << N;
    const std::uint64_t all = tuples - 1;
    BruteForceMetrics m;
    m.closed = a.indices;
    for (Index b = 0; b < N; ++b) {
        const std::uint64_t bit = std::uint64_t{1} << b;
        for (std::uint64_t t = 0; t < tuples; ++t)
            if (t & bit) m.closed[t] += m.closed[t ^ bit];
    }
    m.dimension_distribution.assign(N + 1, 0.0);
    m.length_spectrum.assign(N + 1, 0.0);
    m.shapley.assign(N, 0.0);
    for (std::uint64_t t = 1; t < tuples; ++t) {
        const auto w = static_cast<Index>(std::popcount(t));
        m.mean_dimension += static_cast<double>(w) * a.indices[t];
        m.dimension_distribution[w] += a.indices[t];
        m.length_spectrum[tuple_length(N, t)] += a.indices[t];
        for (Index n : tuple_of_flat(N, t)) m.shapley[n] += a.indices[t] / static_cast<double>(w);
    }
    for (Index n = 0; n < N; ++n) {
        m.first_order.push_back(a.indices[variable_bit(N, n)]);
        m.totals.push_back(1.0 - m.closed[all ^ variable_bit(N, n)]);
    }
    auto scan = [&](const std::vector<double>& spectrum, Index& dim, double& achieved) {
        double cumulative = 0.0;
        for (Index n = 1; n <= N; ++n) {
            cumulative += spectrum[n];
            dim = n;
            achieved = cumulative;
            if (cumulative >= 1.0 - eps) return;
        }
    };
    scan(m.dimension_distribution, m.superposition, m.superposition_achieved);
    scan(m.length_spectrum, m.successive, m.successive_achieved);

    bool reached = false;
    for (Index n = 1; n <= N; ++n) {
        double best = -std::numeric_limits<double>::infinity();
        std::uint64_t best_tuple = 0;
        for (std::uint64_t t = 0; t < tuples; ++t) {
            if (static_cast<Index>(std::popcount(t)) > n) continue;
            if (m.closed[t] > best) {
                best = m.closed[t];
                best_tuple = t;
            }
        }
        m.truncation_profile.push_back(best);
        if (!reached && (best >= 1.0 - eps || n == N)) {
            reached = true;
            m.truncation = n;
            m.truncation_achieved = best;
            m.truncation_tuple = tuple_of_flat(N, best_tuple);
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// Saltelli quasi-Monte Carlo estimator

struct SaltelliResult {
    std::vector<double> first_order;
    std::vector<double> totals;
    std::vector<double> first_order_se;
    std::vector<double> totals_se;
    double mean = 0.0;
    double variance = 0.0;
    std::uint64_t evaluations = 0;
    /// Output variance was ~0; every index is reported as 0.
    bool degenerate = false;
    std::string variant = "saltelli2010-first/jansen-total";
};

namespace detail {

inline Index grid_index(double u, Index size) {
    return std::min(static_cast<Index>(u * static_cast<double>(size)), size - 1);
}

struct SaltelliStats {
    std::vector<double> first;
    std::vector<double> total;
    double mean = 0.0;
    double variance = 0.0;
};

inline SaltelliStats saltelli_stats(const std::vector<double>& fa, const std::vector<double>& fb,
                                    const std::vector<std::vector<double>>& fab, const std::vector<Index>& rows) {
    const Index N = fab.size();
    const double count = static_cast<double>(rows.size());
    SaltelliStats s;
    s.first.assign(N, 0.0);
    s.total.assign(N, 0.0);
    double sum = 0.0;
    for (Index r : rows) sum += fa[r] + fb[r];
    s.mean = sum / (2.0 * count);
    double sq = 0.0;
    for (Index r : rows) sq += (fa[r] - s.mean) * (fa[r] - s.mean) + (fb[r] - s.mean) * (fb[r] - s.mean);
    s.variance = sq / (2.0 * count);
    for (Index n = 0; n < N; ++n) {
        double v = 0.0;
        double vt = 0.0;
        for (Index r : rows) {
            v += fb[r] * (fab[n][r] - fa[r]);
            vt += (fa[r] - fab[n][r]) * (fa[r] - fab[n][r]);
        }
        s.first[n] = v / count;
        s.total[n] = 0.5 * vt / count;
    }
    return s;
}

inline bool degenerate_variance(double variance, double mean) {
    return !(variance > 1e-12 * std::max(mean * mean, std::numeric_limits<double>::min()));
}

}  // namespace detail

/// First-order (Saltelli 2010) and total (Jansen) indices from base_samples
/// rows of scrambled Sobol points mapped onto the grid; base_samples * (N + 2)
/// model evaluations. Standard errors come from `bootstrap` row resamples.
inline SaltelliResult saltelli_estimate(const EvaluatorHandle& f, const ModelSpace& space, Index base_samples,
                                        std::uint64_t seed, Index bootstrap = 200) {
    if (base_samples < 64) throw DomainError("saltelli_estimate: base_samples must be >= 64");
    const Index N = space.dimension();
    if (f.arity() != N) throw ShapeError("saltelli_estimate: evaluator arity does not match the space");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> shift(2 * N);
    for (double& s : shift) s = unit(rng);

    boost::random::sobol qrng(static_cast<unsigned>(2 * N));
    qrng.discard(2 * N);  // drop the all-zero first point
    std::vector<std::vector<Index>> A(base_samples, std::vector<Index>(N));
    std::vector<std::vector<Index>> B = A;
    for (Index r = 0; r < base_samples; ++r)
        for (Index d = 0; d < 2 * N; ++d) {
            double u = std::ldexp(static_cast<double>(qrng()), -64) + shift[d];
            u -= std::floor(u);
            const Index n = d % N;
            (d < N ? A : B)[r][n] = detail::grid_index(u, space.axis(n).size());
        }

    // Rows: A block, B block, then one block per AB_n.
    RowMatrix x(static_cast<Eigen::Index>(base_samples * (N + 2)), static_cast<Eigen::Index>(N));
    auto put = [&](Index row, const std::vector<Index>& idx) {
        for (Index n = 0; n < N; ++n) {
            x(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(n)) = space.axis(n).nodes[idx[n]];
        }
    };
    for (Index r = 0; r < base_samples; ++r) {
        put(r, A[r]);
        put(base_samples + r, B[r]);
        for (Index n = 0; n < N; ++n) {
            auto ab = A[r];
            ab[n] = B[r][n];
            put((2 + n) * base_samples + r, ab);
        }
    }
    const auto y = f.evaluate_batch(x);
    for (double v : y)
        if (!std::isfinite(v)) throw DataError("saltelli_estimate: model returned a non-finite value");
    std::vector<double> fa(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(base_samples));
    std::vector<double> fb(y.begin() + static_cast<std::ptrdiff_t>(base_samples),
                           y.begin() + static_cast<std::ptrdiff_t>(2 * base_samples));
    std::vector<std::vector<double>> fab(N);
    for (Index n = 0; n < N; ++n) {
        const auto begin = y.begin() + static_cast<std::ptrdiff_t>((2 + n) * base_samples);
        fab[n].assign(begin, begin + static_cast<std::ptrdiff_t>(base_samples));
    }

    SaltelliResult result;
    result.evaluations = y.size();
    std::vector<Index> rows(base_samples);
    std::iota(rows.begin(), rows.end(), Index{0});
    const auto point = detail::saltelli_stats(fa, fb, fab, rows);
    result.mean = point.mean;
    result.variance = point.variance;
    result.first_order.assign(N, 0.0);
    result.totals.assign(N, 0.0);
    result.first_order_se.assign(N, 0.0);
    result.totals_se.assign(N, 0.0);
    if (detail::degenerate_variance(point.variance, point.mean)) {
        result.degenerate = true;
        return result;
    }
    for (Index n = 0; n < N; ++n) {
        result.first_order[n] = point.first[n] / point.variance;
        result.totals[n] = point.total[n] / point.variance;
    }
    std::vector<double> s1(N, 0.0), s2(N, 0.0), t1(N, 0.0), t2(N, 0.0);
    std::uniform_int_distribution<Index> pick(0, base_samples - 1);
    for (Index b = 0; b < bootstrap; ++b) {
        for (Index& r : rows) r = pick(rng);
        const auto st = detail::saltelli_stats(fa, fb, fab, rows);
        if (detail::degenerate_variance(st.variance, st.mean)) continue;
        for (Index n = 0; n < N; ++n) {
            const double fi = st.first[n] / st.variance;
            const double ti = st.total[n] / st.variance;
            s1[n] += fi;
            s2[n] += fi * fi;
            t1[n] += ti;
            t2[n] += ti * ti;
        }
    }
    if (bootstrap > 1) {
        const double B = static_cast<double>(bootstrap);
        for (Index n = 0; n < N; ++n) {
            result.first_order_se[n] = std::sqrt(std::max(0.0, (s2[n] - s1[n] * s1[n] / B) / (B - 1.0)));
            result.totals_se[n] = std::sqrt(std::max(0.0, (t2[n] - t1[n] * t1[n] / B) / (B - 1.0)));
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Permutation-sampling Shapley estimator

struct ShapleyEstimate {
    std::vector<double> values;
    std::vector<double> standard_errors;
    std::uint64_t evaluations = 0;
    Index permutations = 0;
    Index inner_samples = 0;
};

/// Along each random permutation pi the cost c(J) = E[Var(f | x outside J)]
/// is estimated for the growing prefixes J of pi (one outer sample of the
/// fixed variables, `inner_samples` resamples of J); variable pi_j receives
/// the increment c(J_j) - c(J_{j-1}). Increments telescope to the full-set
/// cost, and dividing by its mean over permutations makes the estimates sum to 1.
inline ShapleyEstimate shapley_permutation_estimate(const EvaluatorHandle& f, const ModelSpace& space,
                                                    Index permutations, Index inner_samples,
                                                    std::uint64_t seed) {
    if (permutations < 1) throw DomainError("shapley_permutation_estimate: permutations must be >= 1");
    if (inner_samples < 2) throw DomainError("shapley_permutation_estimate: inner_samples must be >= 2");
    const Index N = space.dimension();
    if (f.arity() != N) throw ShapeError("shapley_permutation_estimate: evaluator arity does not match the space");
    std::mt19937_64 rng(seed);
    auto draw = [&](Index n) {
        return space.axis(n).nodes[std::uniform_int_distribution<Index>(0, space.axis(n).size() - 1)(rng)];
    };

    std::vector<std::vector<Index>> orders(permutations, std::vector<Index>(N));
    const Index rows_per_perm = N * inner_samples;
    RowMatrix x(static_cast<Eigen::Index>(permutations * rows_per_perm), static_cast<Eigen::Index>(N));
    for (Index p = 0; p < permutations; ++p) {
        auto& order = orders[p];
        std::iota(order.begin(), order.end(), Index{0});
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<double> outer(N);
        for (Index n = 0; n < N; ++n) outer[n] = draw(n);
        for (Index j = 0; j < N; ++j) {
            for (Index s = 0; s < inner_samples; ++s) {
                const auto row = static_cast<Eigen::Index>(p * rows_per_perm + j * inner_samples + s);
                for (Index n = 0; n < N; ++n) x(row, static_cast<Eigen::Index>(n)) = outer[n];
                for (Index q = 0; q <= j; ++q) x(row, static_cast<Eigen::Index>(order[q])) = draw(order[q]);
            }
        }
    }
    const auto y = f.evaluate_batch(x);
    for (double v : y)
        if (!std::isfinite(v)) throw DataError("shapley_permutation_estimate: model returned a non-finite value");

    std::vector<std::vector<double>> increments(permutations, std::vector<double>(N, 0.0));
    double full_cost = 0.0;
    for (Index p = 0; p < permutations; ++p) {
        double previous = 0.0;
        for (Index j = 0; j < N; ++j) {
            const double* v = y.data() + p * rows_per_perm + j * inner_samples;
            double m = 0.0;
            for (Index s = 0; s < inner_samples; ++s) m += v[s];
            m /= static_cast<double>(inner_samples);
            double var = 0.0;
            for (Index s = 0; s < inner_samples; ++s) var += (v[s] - m) * (v[s] - m);
            var /= static_cast<double>(inner_samples - 1);
            increments[p][orders[p][j]] = var - previous;
            previous = var;
        }
        full_cost += previous;
    }
    full_cost /= static_cast<double>(permutations);

    ShapleyEstimate est;
    est.evaluations = y.size();
    est.permutations = permutations;
    est.inner_samples = inner_samples;
    est.values.assign(N, 0.0);
    est.standard_errors.assign(N, 0.0);
    double mean_square = 0.0;
    for (double v : y) mean_square += v * v;
    mean_square /= static_cast<double>(y.size());
    if (!(full_cost > 1e-12 * std::max(mean_square, std::numeric_limits<double>::min()))) return est;
    const double P = static_cast<double>(permutations);
    for (Index n = 0; n < N; ++n) {
        double s1 = 0.0;
        double s2 = 0.0;
        for (Index p = 0; p < permutations; ++p) {
            const double d = increments[p][n] / full_cost;
            s1 += d;
            s2 += d * d;
        }
        est.values[n] = s1 / P;
        if (permutations > 1) {
            est.standard_errors[n] = std::sqrt(std::max(0.0, (s2 - s1 * s1 / P) / (P - 1.0)) / P);
        }
    }
    return est;
}

}  // namespace ttsense
