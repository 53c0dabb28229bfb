#pragma once

// Sobol tensor train: a TT of shape 2 x ... x 2 whose entry at the binary
// tuple alpha is the Sobol index S_alpha of the surrogate under the grid
// measure. Bit n of alpha (0-based) selects variable n.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ttsense/errors.hpp"
#include "ttsense/model_space.hpp"
#include "ttsense/tt_tensor.hpp"

namespace ttsense {

inline constexpr double kDefaultSobolRoundTol = 1e-10;

struct SobolTT {
    TTTensor tensor;
    double mean = 0.0;
    double variance = 0.0;
    double round_tol = kDefaultSobolRoundTol;
    std::vector<std::string> names;

    [[nodiscard]] Index order() const { return tensor.order(); }
};

/// Binary multi-index of the tuple `vars` (0-based variable ids) over N bits.
inline MultiIndex binary_index(Index N, const std::vector<Index>& vars) {
    MultiIndex alpha(N, 0);
    for (Index v : vars) {
        if (v >= N) {
            throw RangeError("variable " + std::to_string(v) + " out of range for N = " + std::to_string(N));
        }
        alpha[v] = 1;
    }
    return alpha;
}

/// Tuple of the variables whose bit is set.
inline std::vector<Index> tuple_of(const MultiIndex& alpha) {
    std::vector<Index> vars;
    for (Index n = 0; n < alpha.size(); ++n)
        if (alpha[n] != 0) vars.push_back(n);
    return vars;
}

/// Variables not in `vars`.
inline std::vector<Index> complement_of(Index N, const std::vector<Index>& vars) {
    const MultiIndex alpha = binary_index(N, vars);
    std::vector<Index> out;
    for (Index n = 0; n < N; ++n)
        if (alpha[n] == 0) out.push_back(n);
    return out;
}

inline SobolTT build_sobol_tt(const TTTensor& surrogate, const ModelSpace& space,
                              double round_tol = kDefaultSobolRoundTol) {
    if (surrogate.trailing_rank_open()) throw ShapeError("build_sobol_tt: surrogate must be a closed TT");
    if (surrogate.mode_sizes() != space.sizes()) {
        throw ShapeError("build_sobol_tt: surrogate mode sizes do not match the model space");
    }
    if (!(round_tol >= 0.0)) throw DomainError("build_sobol_tt: round_tol must be >= 0");
    const Index N = surrogate.order();

    std::vector<Core> cores;
    cores.reserve(N);
    Eigen::MatrixXd mean_chain = Eigen::MatrixXd::Ones(1, 1);
    for (Index n = 0; n < N; ++n) {
        const Core& t = surrogate.core(n);
        const auto& w = space.axis(n).weights;
        const Index rl = t.left_rank();
        const Index rr = t.right_rank();
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rl), static_cast<Eigen::Index>(rr));
        for (Index i = 0; i < t.mode_size(); ++i) m += w[i] * t.slice(i);
        mean_chain = mean_chain * m;

        Eigen::MatrixXd second = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rl * rl),
                                                       static_cast<Eigen::Index>(rr * rr));
        for (Index i = 0; i < t.mode_size(); ++i) {
            const Eigen::MatrixXd c = t.slice(i) - m;
            for (Index a1 = 0; a1 < rl; ++a1)
                for (Index a2 = 0; a2 < rl; ++a2) {
                    const auto row = static_cast<Eigen::Index>(a1 * rl + a2);
                    for (Index b1 = 0; b1 < rr; ++b1) {
                        const double scaled = w[i] * c(static_cast<Eigen::Index>(a1), static_cast<Eigen::Index>(b1));
                        if (scaled == 0.0) continue;
                        for (Index b2 = 0; b2 < rr; ++b2) {
                            second(row, static_cast<Eigen::Index>(b1 * rr + b2)) +=
                                scaled * c(static_cast<Eigen::Index>(a2), static_cast<Eigen::Index>(b2));
                        }
                    }
                }
        }
        Core u(rl * rl, 2, rr * rr);
        for (Index a1 = 0; a1 < rl; ++a1)
            for (Index a2 = 0; a2 < rl; ++a2)
                for (Index b1 = 0; b1 < rr; ++b1)
                    for (Index b2 = 0; b2 < rr; ++b2) {
                        const Index a = a1 * rl + a2;
                        const Index b = b1 * rr + b2;
                        u(a, 0, b) = m(static_cast<Eigen::Index>(a1), static_cast<Eigen::Index>(b1)) *
                                     m(static_cast<Eigen::Index>(a2), static_cast<Eigen::Index>(b2));
                        u(a, 1, b) = second(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
                    }
        cores.push_back(std::move(u));
    }
    const TTTensor U(std::move(cores));
    const double mean = mean_chain(0, 0);
    const double empty_entry = mean * mean;
    const std::vector<Index> binary(N, 2);
    const double second_moment = dot(U, TTTensor::ones(binary));
    const double variance = second_moment - empty_entry;
    if (!(variance > 1e-12 * std::max(second_moment, std::numeric_limits<double>::min()))) {
        throw DegenerateModelError("build_sobol_tt: model output has zero variance; Sobol indices are undefined");
    }
    TTTensor centered = add(U, scale(TTTensor::delta(binary, MultiIndex(N, 0)), -empty_entry));
    TTTensor rounded = round(scale(centered, 1.0 / variance), round_tol);
    // Rounding perturbs the total mass slightly; restore sum = 1.
    const double mass = dot(rounded, TTTensor::ones(binary));
    return {scale(rounded, 1.0 / mass), mean, variance, round_tol, space.names()};
}

/// Per core: slice 1 becomes slice 0 + slice 1, turning S_alpha into sum over subsets.
inline TTTensor closed_transform(const TTTensor& t) {
    std::vector<Core> cores = t.cores();
    for (Core& c : cores) {
        if (c.mode_size() != 2) throw ShapeError("closed_transform: binary mode sizes required");
        for (Index a = 0; a < c.left_rank(); ++a)
            for (Index b = 0; b < c.right_rank(); ++b) c(a, 1, b) += c(a, 0, b);
    }
    return TTTensor(std::move(cores), t.trailing_rank_open());
}

inline TTTensor closed_tt(const SobolTT& s) { return closed_transform(s.tensor); }

/// Per core: slice 0 becomes slice 0 + slice 1, turning S_alpha into sum over supersets.
inline TTTensor superset_transform(const TTTensor& t) {
    std::vector<Core> cores = t.cores();
    for (Core& c : cores) {
        if (c.mode_size() != 2) throw ShapeError("superset_transform: binary mode sizes required");
        for (Index a = 0; a < c.left_rank(); ++a)
            for (Index b = 0; b < c.right_rank(); ++b) c(a, 0, b) += c(a, 1, b);
    }
    return TTTensor(std::move(cores), t.trailing_rank_open());
}

/// S_alpha for the tuple `vars`; 0 for the empty tuple.
inline double query_index(const SobolTT& s, const std::vector<Index>& vars) {
    if (vars.empty()) return 0.0;
    return evaluate(s.tensor, binary_index(s.order(), vars));
}

/// Closed index S^C_alpha read from a precomputed closed tensor.
inline double closed_index(const TTTensor& closed, const std::vector<Index>& vars) {
    if (vars.empty()) return 0.0;
    return evaluate(closed, binary_index(closed.order(), vars));
}

inline double closed_index(const SobolTT& s, const std::vector<Index>& vars) {
    return closed_index(closed_tt(s), vars);
}

/// Total index S^T_alpha = 1 - S^C of the complement.
inline double total_index(const TTTensor& closed, const std::vector<Index>& vars) {
    if (vars.empty()) throw DomainError("total_index: the tuple must not be empty");
    return 1.0 - closed_index(closed, complement_of(closed.order(), vars));
}

inline double total_index(const SobolTT& s, const std::vector<Index>& vars) {
    return total_index(closed_tt(s), vars);
}

}  // namespace ttsense
