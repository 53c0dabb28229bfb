#pragma once

// Automaton tensors over binary tuples alpha in {0,1}^N. Bit n of alpha says
// whether variable n belongs to the tuple. |alpha| is the Hamming weight and
// len(alpha) = last set bit - first set bit + 1 (len of the empty tuple is 0).
//
// Each mask is a finite automaton read left to right: the bond between cores
// carries the automaton state (one-hot), slice a of a core is the transition
// matrix for input symbol a, and the last core maps final states to
// acceptance (masks) or to output channels (state tensors).

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ttsense/errors.hpp"
#include "ttsense/tt_tensor.hpp"

namespace ttsense {

namespace detail {

inline void require_order(Index N, const char* op) {
    if (N < 1) throw DomainError(std::string(op) + ": N must be >= 1");
}

inline void require_threshold(Index N, Index n, const char* op) {
    if (n > N) throw DomainError(std::string(op) + ": threshold must satisfy 0 <= n <= N");
}

// Counter over states 0..states-1; a set bit read in the top state is dropped.
inline Core counter_first(Index states) {
    Core c(1, 2, states);
    c(0, 0, 0) = 1.0;
    if (states > 1) c(0, 1, 1) = 1.0;
    return c;
}

inline Core counter_middle(Index states) {
    Core c(states, 2, states);
    for (Index s = 0; s < states; ++s) {
        c(s, 0, s) = 1.0;
        if (s + 1 < states) c(s, 1, s + 1) = 1.0;
    }
    return c;
}

}  // namespace detail

/// Entry at alpha is |alpha|; internal ranks 2.
inline TTTensor hamming_weight_tt(Index N) {
    detail::require_order(N, "hamming_weight_tt");
    if (N == 1) return TTTensor({Core(1, 2, 1, {0.0, 1.0})});
    std::vector<Core> cores;
    // Row state (partial count, 1).
    cores.emplace_back(1, 2, 2, std::vector<double>{0.0, 1.0, 1.0, 1.0});
    for (Index n = 1; n + 1 < N; ++n) {
        cores.emplace_back(2, 2, 2, std::vector<double>{1.0, 0.0, 1.0, 0.0,  //
                                                       0.0, 1.0, 1.0, 1.0});
    }
    cores.emplace_back(2, 2, 1, std::vector<double>{1.0, 1.0, 0.0, 1.0});
    return TTTensor(std::move(cores));
}

/// Entry at alpha is 1 if |alpha| <= n, else 0; internal ranks n + 1.
inline TTTensor hamming_mask_tt(Index N, Index n) {
    detail::require_order(N, "hamming_mask_tt");
    detail::require_threshold(N, n, "hamming_mask_tt");
    const Index states = n + 1;
    if (N == 1) return TTTensor({Core(1, 2, 1, {1.0, n >= 1 ? 1.0 : 0.0})});
    std::vector<Core> cores;
    cores.push_back(detail::counter_first(states));
    for (Index k = 1; k + 1 < N; ++k) cores.push_back(detail::counter_middle(states));
    Core last(states, 2, 1);
    for (Index s = 0; s < states; ++s) {
        last(s, 0, 0) = 1.0;
        last(s, 1, 0) = s + 1 < states ? 1.0 : 0.0;
    }
    cores.push_back(std::move(last));
    return TTTensor(std::move(cores));
}

/// Channel k (0..N) at alpha is 1 exactly when |alpha| = k; ranks N + 1.
inline TTTensor hamming_state_tt(Index N) {
    detail::require_order(N, "hamming_state_tt");
    const Index states = N + 1;
    std::vector<Core> cores;
    cores.push_back(detail::counter_first(states));
    for (Index k = 1; k < N; ++k) cores.push_back(detail::counter_middle(states));
    return TTTensor(std::move(cores), true);
}

/// Entry at alpha is 1 if len(alpha) <= n, else 0; internal ranks n + 1.
///
/// State 0: no set bit read yet. State j >= 1: the span from the first set bit
/// to the current position is j. State n saturates: any further set bit is
/// rejected.
inline TTTensor length_mask_tt(Index N, Index n) {
    detail::require_order(N, "length_mask_tt");
    detail::require_threshold(N, n, "length_mask_tt");
    const Index states = n + 1;
    if (N == 1) return TTTensor({Core(1, 2, 1, {1.0, n >= 1 ? 1.0 : 0.0})});
    std::vector<Core> cores;
    cores.push_back(detail::counter_first(states));
    for (Index k = 1; k + 1 < N; ++k) {
        Core c(states, 2, states);
        c(0, 0, 0) = 1.0;
        if (states > 1) c(0, 1, 1) = 1.0;
        for (Index s = 1; s < states; ++s) {
            const Index next = std::min(s + 1, n);
            c(s, 0, next) = 1.0;
            if (s < n) c(s, 1, next) = 1.0;
        }
        cores.push_back(std::move(c));
    }
    Core last(states, 2, 1);
    for (Index s = 0; s < states; ++s) {
        last(s, 0, 0) = 1.0;
        last(s, 1, 0) = s < n ? 1.0 : 0.0;
    }
    cores.push_back(std::move(last));
    return TTTensor(std::move(cores));
}

/// Channel k (0..N) at alpha is 1 exactly when len(alpha) = k.
///
/// After k symbols the automaton is a sum over paths through the states
///   none                 no set bit yet
///   open(c), 1<=c<=k     first set bit c positions ago, more may follow
///   closed(l), 1<=l<=k   committed to a tuple of length l, no set bit may follow
/// Every set bit forks a committed copy; only the copy made at the last set
/// bit survives, so exactly one path reaches an output channel.
inline TTTensor length_state_tt(Index N) {
    detail::require_order(N, "length_state_tt");
    // Bond state ids after k symbols: none = 0, open(c) = c, closed(l) = k + l.
    auto width = [](Index k) { return 2 * k + 1; };
    auto open_id = [](Index, Index c) { return c; };
    auto closed_id = [](Index k, Index l) { return k + l; };

    std::vector<Core> cores;
    for (Index p = 0; p < N; ++p) {
        const bool last = p + 1 == N;
        const Index left = width(p);
        const Index right = last ? N + 1 : width(p + 1);
        Core c(left, 2, right);
        // Last core: committed states write their length channel, open ones vanish.
        auto emit = [&](Index a, Index from, bool is_closed, Index value) {
            if (!last) {
                c(from, a, is_closed ? closed_id(p + 1, value) : open_id(p + 1, value)) += 1.0;
            } else if (is_closed) {
                c(from, a, value) += 1.0;
            }
        };
        c(0, 0, 0) += 1.0;  // none stays none; channel 0 on the last core
        emit(1, 0, false, 1);
        emit(1, 0, true, 1);
        for (Index cnt = 1; cnt <= p; ++cnt) {
            emit(0, open_id(p, cnt), false, cnt + 1);
            emit(1, open_id(p, cnt), false, cnt + 1);
            emit(1, open_id(p, cnt), true, cnt + 1);
        }
        for (Index l = 1; l <= p; ++l) emit(0, closed_id(p, l), true, l);
        cores.push_back(std::move(c));
    }
    return TTTensor(std::move(cores), true);
}

struct ReciprocalWeight {
    TTTensor tensor;
    /// Largest relative entry error found by the check.
    double max_rel_error = 0.0;
    /// True when every entry was checked, false for the stratified sample.
    bool exhaustive = false;
};

namespace detail {

// Exact tensor with entries 1 / max(|alpha|, 1): the weight counter of
// hamming_state_tt with its channels collapsed by k -> 1 / max(k, 1).
inline TTTensor exact_reciprocal_weight(Index N) {
    const Index states = N + 1;
    auto g = [](Index k) { return k == 0 ? 1.0 : 1.0 / static_cast<double>(k); };
    if (N == 1) return TTTensor({Core(1, 2, 1, {1.0, 1.0})});
    std::vector<Core> cores;
    cores.push_back(counter_first(states));
    for (Index k = 1; k + 1 < N; ++k) cores.push_back(counter_middle(states));
    Core last(states, 2, 1);
    for (Index s = 0; s < states; ++s) {
        last(s, 0, 0) = g(s);
        if (s + 1 < states) last(s, 1, 0) = g(s + 1);
    }
    cores.push_back(std::move(last));
    return TTTensor(std::move(cores));
}

inline constexpr Index kReciprocalExhaustiveMaxN = 20;

// Largest relative error of `t` against 1 / max(|alpha|, 1): exhaustive for
// small N, otherwise `per_weight` random tuples of every weight plus the
// leading-bits and trailing-bits tuples.
inline double reciprocal_weight_error(const TTTensor& t, Index per_weight = 200) {
    const Index N = t.order();
    double worst = 0.0;
    if (N <= kReciprocalExhaustiveMaxN) {
        const auto values = full(t);
        for (Index flat = 0; flat < values.size(); ++flat) {
            const auto w = static_cast<Index>(std::popcount(static_cast<std::uint64_t>(flat)));
            const double exact = w == 0 ? 1.0 : 1.0 / static_cast<double>(w);
            worst = std::max(worst, std::abs(values[flat] - exact) / exact);
        }
        return worst;
    }
    std::mt19937_64 rng(0x5eed);
    MultiIndex alpha(N);
    std::vector<Index> order(N);
    for (Index w = 0; w <= N; ++w) {
        const double exact = w == 0 ? 1.0 : 1.0 / static_cast<double>(w);
        auto check = [&] { worst = std::max(worst, std::abs(evaluate(t, alpha) - exact) / exact); };
        for (Index n = 0; n < N; ++n) alpha[n] = n < w ? 1 : 0;
        check();
        for (Index n = 0; n < N; ++n) alpha[n] = n >= N - w ? 1 : 0;
        check();
        for (Index s = 0; s < per_weight; ++s) {
            std::iota(order.begin(), order.end(), Index{0});
            std::shuffle(order.begin(), order.end(), rng);
            std::fill(alpha.begin(), alpha.end(), 0);
            for (Index n = 0; n < w; ++n) alpha[order[n]] = 1;
            check();
        }
    }
    return worst;
}

}  // namespace detail

inline constexpr Index kReciprocalWeightRankCap = 30;

/// Lowest-rank truncation of the exact 1 / max(|alpha|, 1) tensor whose
/// largest relative entry error is within `rel_tol`.
inline ReciprocalWeight reciprocal_weight_build(Index N, double rel_tol,
                                                Index rank_cap = kReciprocalWeightRankCap) {
    detail::require_order(N, "reciprocal_weight_tt");
    if (!(rel_tol > 0.0)) throw DomainError("reciprocal_weight_tt: rel_tol must be positive");
    const TTTensor exact = detail::exact_reciprocal_weight(N);
    const bool exhaustive = N <= detail::kReciprocalExhaustiveMaxN;
    double last_error = 0.0;
    for (Index r = 1; r <= rank_cap; ++r) {
        TTTensor t = round(exact, 0.0, r);
        last_error = detail::reciprocal_weight_error(t);
        if (last_error <= rel_tol) return {std::move(t), last_error, exhaustive};
        if (t.max_rank() < r) break;  // already exact up to round-off
    }
    std::ostringstream os;
    os << "reciprocal_weight_tt: rank cap " << rank_cap << " reached with max relative error " << last_error
       << " > " << rel_tol;
    throw ApproximationError(os.str());
}

inline TTTensor reciprocal_weight_tt(Index N, double rel_tol) {
    return reciprocal_weight_build(N, rel_tol).tensor;
}

}  // namespace ttsense
