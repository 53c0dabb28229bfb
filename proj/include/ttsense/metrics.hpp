#pragma once

// Variance-based metrics computed by contracting a Sobol TT with automaton
// masks. Orders and lengths are indexed 0..N; entry 0 of a distribution is
// the residual mass at the empty tuple and should be ~0.

#include <cmath>
#include <string>
#include <vector>

#include "ttsense/errors.hpp"
#include "ttsense/masks.hpp"
#include "ttsense/sobol_tt.hpp"
#include "ttsense/tt_tensor.hpp"

namespace ttsense {

inline constexpr double kDefaultEpsilon = 0.05;
inline constexpr double kResidualErrorThreshold = 1e-3;
inline constexpr double kShapleyWeightTol = 1e-8;
inline constexpr double kShapleyRoundTol = 1e-12;

struct EffectiveDimension {
    Index dimension = 0;
    /// Relative variance captured at `dimension`.
    double achieved = 0.0;
    /// False when no order reached 1 - epsilon and N was returned instead.
    bool reached = false;
};

struct TruncationDimension {
    Index dimension = 0;
    double achieved = 0.0;
    bool reached = false;
    /// Variables (0-based) of the best tuple at `dimension`.
    std::vector<Index> tuple;
    /// v(n) for n = 1..N (element n - 1); ends at the first hit unless the
    /// full profile was requested.
    std::vector<double> profile;
};

struct SensitivityReport {
    double epsilon = kDefaultEpsilon;
    double mean_dimension = 0.0;
    /// nu(0..N); nu(0) is the residual at the empty tuple.
    std::vector<double> dimension_distribution;
    /// Variance by tuple length, 0..N; entry 0 is the residual.
    std::vector<double> length_spectrum;
    EffectiveDimension superposition;
    TruncationDimension truncation;
    EffectiveDimension successive;
    std::vector<double> shapley;
    std::vector<double> first_order;
    std::vector<double> totals;
    /// |D_S - sum of first-order totals|.
    double liu_owen_discrepancy = 0.0;
    double mean = 0.0;
    double variance = 0.0;
    std::vector<std::string> names;
};

namespace detail {

inline void require_epsilon(double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("epsilon must satisfy 0 < epsilon < 1");
}

// First n (1-based) whose cumulative mass reaches 1 - eps.
inline EffectiveDimension scan_cumulative(const std::vector<double>& spectrum, double eps) {
    const Index N = spectrum.size() - 1;
    double cumulative = 0.0;
    for (Index n = 1; n <= N; ++n) {
        cumulative += spectrum[n];
        if (cumulative >= 1.0 - eps) return {n, cumulative, true};
    }
    return {N, cumulative, false};
}

inline std::vector<double> checked_spectrum(std::vector<double> v, const char* what) {
    if (std::abs(v.front()) > kResidualErrorThreshold) {
        throw ConsistencyError(std::string(what) + ": residual mass " + std::to_string(v.front()) +
                               " at the empty tuple; the Sobol TT is not zero there");
    }
    return v;
}

}  // namespace detail

/// D_S = sum over alpha of |alpha| * S_alpha.
inline double mean_dimension(const SobolTT& s) { return dot(s.tensor, hamming_weight_tt(s.order())); }

/// nu(n) = sum over |alpha| = n of S_alpha, for n = 0..N.
inline std::vector<double> dimension_distribution(const SobolTT& s) {
    return detail::checked_spectrum(state_contract(s.tensor, hamming_state_tt(s.order())),
                                    "dimension_distribution");
}

/// Variance by tuple length, for lengths 0..N.
inline std::vector<double> length_spectrum(const SobolTT& s) {
    return detail::checked_spectrum(state_contract(s.tensor, length_state_tt(s.order())), "length_spectrum");
}

inline EffectiveDimension effective_superposition(const std::vector<double>& nu, double eps) {
    detail::require_epsilon(eps);
    return detail::scan_cumulative(nu, eps);
}

inline EffectiveDimension effective_superposition(const SobolTT& s, double eps) {
    detail::require_epsilon(eps);
    return detail::scan_cumulative(dimension_distribution(s), eps);
}

/// Smallest n such that some tuple of at most n variables has closed index
/// >= 1 - eps. With `full_profile` every v(n) is computed, not just up to the hit.
inline TruncationDimension effective_truncation(const TTTensor& closed, double eps, bool full_profile = true,
                                                Index cap = kDefaultDenseCap) {
    detail::require_epsilon(eps);
    const Index N = closed.order();
    TruncationDimension result;
    for (Index n = 1; n <= N; ++n) {
        const MaxEntry best = max_entry(hadamard(closed, hamming_mask_tt(N, n)), cap);
        result.profile.push_back(best.value);
        if (!result.reached && best.value >= 1.0 - eps) {
            result.dimension = n;
            result.achieved = best.value;
            result.reached = true;
            result.tuple = tuple_of(best.index);
            if (!full_profile) break;
        }
        if (!result.reached && n == N) {
            result.dimension = N;
            result.achieved = best.value;
            result.tuple = tuple_of(best.index);
        }
    }
    return result;
}

inline TruncationDimension effective_truncation(const SobolTT& s, double eps, bool full_profile = true) {
    return effective_truncation(closed_tt(s), eps, full_profile);
}

inline EffectiveDimension effective_successive(const std::vector<double>& lengths, double eps) {
    detail::require_epsilon(eps);
    return detail::scan_cumulative(lengths, eps);
}

inline EffectiveDimension effective_successive(const SobolTT& s, double eps) {
    detail::require_epsilon(eps);
    return detail::scan_cumulative(length_spectrum(s), eps);
}

/// phi_n = sum over alpha containing n of S_alpha / |alpha|.
inline std::vector<double> shapley_values(const SobolTT& s, double weight_tol = kShapleyWeightTol) {
    const Index N = s.order();
    const TTTensor weighted = round(hadamard(s.tensor, reciprocal_weight_tt(N, weight_tol)), kShapleyRoundTol);
    // Sum over tuples containing n: superset accumulation read at the singleton.
    const TTTensor up = superset_transform(weighted);
    std::vector<double> phi(N);
    for (Index n = 0; n < N; ++n) phi[n] = evaluate(up, binary_index(N, {n}));
    return phi;
}

inline SensitivityReport full_report(const SobolTT& s, double eps = kDefaultEpsilon) {
    detail::require_epsilon(eps);
    const Index N = s.order();
    SensitivityReport r;
    r.epsilon = eps;
    r.mean = s.mean;
    r.variance = s.variance;
    r.names = s.names;
    r.mean_dimension = mean_dimension(s);
    r.dimension_distribution = dimension_distribution(s);
    r.length_spectrum = length_spectrum(s);
    r.superposition = effective_superposition(r.dimension_distribution, eps);
    r.successive = effective_successive(r.length_spectrum, eps);
    const TTTensor closed = closed_tt(s);
    r.truncation = effective_truncation(closed, eps);
    r.shapley = shapley_values(s);
    double total_sum = 0.0;
    for (Index n = 0; n < N; ++n) {
        r.first_order.push_back(query_index(s, {n}));
        r.totals.push_back(total_index(closed, {n}));
        total_sum += r.totals.back();
    }
    r.liu_owen_discrepancy = std::abs(r.mean_dimension - total_sum);
    return r;
}

}  // namespace ttsense
