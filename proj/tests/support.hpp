#pragma once

// Independent oracles shared by the test suites. Nothing here calls the
// library's contraction or materialization code.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "ttsense/ttsense.hpp"

namespace oracle {

using ttsense::Index;
using ttsense::MultiIndex;
using ttsense::TTTensor;

/// Entry by explicit row-vector times matrix products over the raw core storage.
inline std::vector<double> naive_channels(const TTTensor& t, const MultiIndex& idx) {
    std::vector<double> row{1.0};
    for (Index n = 0; n < t.order(); ++n) {
        const auto& c = t.core(n);
        std::vector<double> next(c.right_rank(), 0.0);
        for (Index a = 0; a < c.left_rank(); ++a)
            for (Index b = 0; b < c.right_rank(); ++b) next[b] += row[a] * c.data()[(a * c.mode_size() + idx[n]) * c.right_rank() + b];
        row = std::move(next);
    }
    return row;
}

inline double naive_entry(const TTTensor& t, const MultiIndex& idx) { return naive_channels(t, idx).front(); }

inline MultiIndex unflatten(Index flat, const std::vector<Index>& sizes) {
    MultiIndex idx(sizes.size());
    for (Index n = sizes.size(); n-- > 0;) {
        idx[n] = flat % sizes[n];
        flat /= sizes[n];
    }
    return idx;
}

inline Index total_size(const std::vector<Index>& sizes) {
    Index t = 1;
    for (Index s : sizes) t *= s;
    return t;
}

/// Dense row-major values (single channel).
inline std::vector<double> naive_full(const TTTensor& t) {
    const auto sizes = t.mode_sizes();
    std::vector<double> out(total_size(sizes));
    for (Index f = 0; f < out.size(); ++f) out[f] = naive_entry(t, unflatten(f, sizes));
    return out;
}

inline int popcount(std::uint64_t x) {
    int c = 0;
    for (; x; x &= x - 1) ++c;
    return c;
}

/// Bits of a binary multi-index, variable 0 first.
inline std::vector<int> bits_of(Index flat, Index N) {
    std::vector<int> b(N);
    for (Index n = 0; n < N; ++n) b[n] = static_cast<int>((flat >> (N - 1 - n)) & 1);
    return b;
}

/// Span between first and last variable of the tuple (0 for the empty tuple).
inline Index tuple_span(const std::vector<int>& bits) {
    Index first = bits.size(), last = 0;
    bool any = false;
    for (Index n = 0; n < bits.size(); ++n) {
        if (bits[n]) {
            if (!any) first = n;
            last = n;
            any = true;
        }
    }
    return any ? last - first + 1 : 0;
}

/// Direct ANOVA of a dense tensor under uniform weights: returns S_alpha for
/// every binary tuple (row-major, variable 0 = most significant bit) by
/// inclusion-exclusion over conditional-expectation variances. Exponential,
/// only for N <= 6 or so.
struct DenseANOVA {
    std::vector<double> sobol;   // by tuple
    std::vector<double> closed;  // by tuple
    double mean = 0.0;
    double variance = 0.0;
};

inline DenseANOVA dense_anova(const std::vector<double>& values, const std::vector<Index>& sizes) {
    const Index N = sizes.size();
    const Index total = values.size();
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(total);
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(total);

    const Index tuples = Index{1} << N;
    std::vector<double> closed_var(tuples, 0.0);
    for (Index t = 0; t < tuples; ++t) {
        const auto keep = bits_of(t, N);
        // conditional mean of f given the kept variables
        std::vector<Index> kept_sizes;
        for (Index n = 0; n < N; ++n)
            if (keep[n]) kept_sizes.push_back(sizes[n]);
        const Index kept_total = total_size(kept_sizes);
        std::vector<double> sums(kept_total, 0.0);
        std::vector<double> counts(kept_total, 0.0);
        for (Index f = 0; f < total; ++f) {
            const auto idx = unflatten(f, sizes);
            Index key = 0;
            for (Index n = 0; n < N; ++n)
                if (keep[n]) key = key * sizes[n] + idx[n];
            sums[key] += values[f];
            counts[key] += 1.0;
        }
        double v = 0.0;
        for (Index k = 0; k < kept_total; ++k) {
            const double m = sums[k] / counts[k] - mean;
            v += m * m;
        }
        closed_var[t] = v / static_cast<double>(kept_total);
    }
    DenseANOVA out;
    out.mean = mean;
    out.variance = var;
    out.sobol.assign(tuples, 0.0);
    out.closed.assign(tuples, 0.0);
    for (Index t = 0; t < tuples; ++t) {
        out.closed[t] = closed_var[t] / var;
        double s = 0.0;
        // S_t = sum over subsets u of t of (-1)^{|t|-|u|} V^C_u / V
        for (Index u = t;; u = (u - 1) & t) {
            const int sign = ((popcount(t) - popcount(u)) % 2 == 0) ? 1 : -1;
            s += sign * closed_var[u];
            if (u == 0) break;
        }
        out.sobol[t] = s / var;
    }
    return out;
}

/// Uniform [0,1] model space with `I` points per axis.
inline ttsense::ModelSpace unit_space(const std::vector<Index>& sizes) {
    std::vector<ttsense::AxisGrid> axes;
    std::vector<std::string> names;
    for (Index n = 0; n < sizes.size(); ++n) {
        axes.push_back(ttsense::build_axis(ttsense::Distribution::uniform(0.0, 1.0), sizes[n]));
        names.push_back("x" + std::to_string(n + 1));
    }
    return ttsense::ModelSpace(std::move(axes), std::move(names));
}

}  // namespace oracle
