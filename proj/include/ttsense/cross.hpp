#pragma once

// Rank-adaptive single-site TT-cross over the index grid of a ModelSpace.
//
// Each core k is interpolated from the fiber f(left[k], :, right[k]) where
// left[k] holds prefixes (positions 0..k-1) and right[k] holds suffixes
// (positions k+1..N-1). A left-to-right half sweep QR-factors each fiber,
// picks maxvol rows as the next prefix set and stores Q * Q[rows]^{-1}; the
// last core keeps the raw fiber. The right-to-left half sweep mirrors this.
// When a full sweep improves the validation error by less than 10 %, every
// right set gains kick_rank random suffixes before the next sweep.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "ttsense/blackbox.hpp"
#include "ttsense/errors.hpp"
#include "ttsense/maxvol.hpp"
#include "ttsense/model_space.hpp"
#include "ttsense/tt_tensor.hpp"

namespace ttsense {

struct CrossConfig {
    Index initial_rank = 2;
    Index kick_rank = 2;
    Index max_rank = 50;
    Index max_sweeps = 25;
    Index val_samples = 1000;
    double val_rel_tol = 1e-4;
    std::uint64_t seed = 0;
    /// Relative tolerance of the TT rounding applied to the returned surrogate.
    double final_round_tol = 1e-14;
    double maxvol_tol = 0.05;

    void validate() const {
        if (initial_rank < 1 || kick_rank < 1 || max_rank < 1 || max_sweeps < 1 || val_samples < 1) {
            throw DomainError("CrossConfig: ranks, sweeps and val_samples must be positive");
        }
        if (!(val_rel_tol > 0.0)) throw DomainError("CrossConfig: val_rel_tol must be positive");
        if (!(final_round_tol >= 0.0)) throw DomainError("CrossConfig: final_round_tol must be >= 0");
        if (!(maxvol_tol >= 0.0)) throw DomainError("CrossConfig: maxvol_tol must be >= 0");
    }
};

struct CrossReport {
    /// Model calls made by this run (cached grid points are counted once).
    std::uint64_t eval_count = 0;
    std::uint64_t validation_evals = 0;
    Index sweeps = 0;
    /// Relative L2 error of the returned surrogate on the validation set.
    double val_error = std::numeric_limits<double>::infinity();
    bool converged = false;
    std::vector<Index> ranks;
    /// Validation error after each full sweep.
    std::vector<double> error_history;
    Index maxvol_fallbacks = 0;
};

struct CrossResult {
    TTTensor tensor;
    CrossReport report;
};

namespace detail {

struct MultiIndexHash {
    std::size_t operator()(const MultiIndex& idx) const noexcept {
        std::uint64_t h = 1469598103934665603ULL;
        for (Index v : idx) {
            h ^= static_cast<std::uint64_t>(v);
            h *= 1099511628211ULL;
        }
        return static_cast<std::size_t>(h);
    }
};

class CrossSampler {
public:
    CrossSampler(const EvaluatorHandle& f, const ModelSpace& space) : f_(f), space_(space) {}

    /// Model values at `indices`, evaluating each new grid point once in a single batch.
    std::vector<double> fetch(const std::vector<MultiIndex>& indices) {
        std::vector<MultiIndex> fresh;
        std::unordered_map<MultiIndex, int, MultiIndexHash> queued;
        for (const auto& idx : indices) {
            if (cache_.count(idx) == 0 && queued.emplace(idx, 0).second) fresh.push_back(idx);
        }
        if (!fresh.empty()) {
            const Index N = space_.dimension();
            RowMatrix x(static_cast<Eigen::Index>(fresh.size()), static_cast<Eigen::Index>(N));
            for (Index m = 0; m < fresh.size(); ++m) {
                const auto p = index_to_point(space_, fresh[m]);
                for (Index n = 0; n < N; ++n) x(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) = p[n];
            }
            const auto values = f_.evaluate_batch(x);
            calls_ += fresh.size();
            for (Index m = 0; m < fresh.size(); ++m) {
                if (!std::isfinite(values[m])) {
                    std::ostringstream os;
                    os.precision(17);
                    os << "model returned a non-finite value at x = (";
                    const auto p = index_to_point(space_, fresh[m]);
                    for (Index n = 0; n < p.size(); ++n) os << (n ? ", " : "") << p[n];
                    os << ")";
                    throw DataError(os.str());
                }
                cache_.emplace(fresh[m], values[m]);
            }
        }
        std::vector<double> out;
        out.reserve(indices.size());
        for (const auto& idx : indices) out.push_back(cache_.at(idx));
        return out;
    }

    [[nodiscard]] std::uint64_t calls() const noexcept { return calls_; }

private:
    const EvaluatorHandle& f_;
    const ModelSpace& space_;
    std::unordered_map<MultiIndex, double, MultiIndexHash> cache_;
    std::uint64_t calls_ = 0;
};

inline MultiIndex join_index(const MultiIndex& prefix, Index i, const MultiIndex& suffix) {
    MultiIndex out;
    out.reserve(prefix.size() + 1 + suffix.size());
    out.insert(out.end(), prefix.begin(), prefix.end());
    out.push_back(i);
    out.insert(out.end(), suffix.begin(), suffix.end());
    return out;
}

// Thin Q factor of a tall-or-square matrix with min(rows, cols) columns.
inline Eigen::MatrixXd thin_q(const Eigen::MatrixXd& a) {
    const auto q = std::min(a.rows(), a.cols());
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    return qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), q);
}

// q * inverse(q[rows]).
inline Eigen::MatrixXd interpolation_matrix(const Eigen::MatrixXd& q, const std::vector<Index>& rows) {
    Eigen::MatrixXd sub(static_cast<Eigen::Index>(rows.size()), q.cols());
    for (Index j = 0; j < rows.size(); ++j) sub.row(static_cast<Eigen::Index>(j)) = q.row(static_cast<Eigen::Index>(rows[j]));
    return sub.transpose().partialPivLu().solve(q.transpose()).transpose();
}

inline Index suffix_count(const std::vector<Index>& sizes, Index k, Index cap) {
    Index total = 1;
    for (Index n = k + 1; n < sizes.size(); ++n) {
        if (total > cap / sizes[n] + 1) return cap;
        total *= sizes[n];
    }
    return std::min(total, cap);
}

}  // namespace detail

/// Builds a TT surrogate of `f` on the grid of `space`.
inline CrossResult tt_cross(const EvaluatorHandle& f, const ModelSpace& space, const CrossConfig& cfg) {
    cfg.validate();
    const Index N = space.dimension();
    if (f.arity() != N) {
        throw ShapeError("tt_cross: evaluator arity " + std::to_string(f.arity()) +
                         " does not match space dimension " + std::to_string(N));
    }
    const std::vector<Index> sizes = space.sizes();
    std::mt19937_64 rng(cfg.seed);
    detail::CrossSampler sampler(f, space);
    CrossReport report;

    // Validation set, drawn before any pivot so it does not depend on the sweeps.
    std::vector<MultiIndex> val_idx(cfg.val_samples, MultiIndex(N));
    for (auto& idx : val_idx)
        for (Index n = 0; n < N; ++n) idx[n] = std::uniform_int_distribution<Index>(0, sizes[n] - 1)(rng);
    const std::vector<double> val_f = sampler.fetch(val_idx);
    report.validation_evals = sampler.calls();
    double val_norm = 0.0;
    for (double v : val_f) val_norm += v * v;
    val_norm = std::sqrt(val_norm);

    auto validation_error = [&](const TTTensor& t) {
        double err = 0.0;
        for (Index m = 0; m < val_idx.size(); ++m) {
            const double d = evaluate(t, val_idx[m]) - val_f[m];
            err += d * d;
        }
        err = std::sqrt(err);
        return val_norm > 0.0 ? err / val_norm : err;
    };

    auto random_suffix = [&](Index k) {
        MultiIndex s;
        for (Index n = k + 1; n < N; ++n) s.push_back(std::uniform_int_distribution<Index>(0, sizes[n] - 1)(rng));
        return s;
    };

    // Nested random right sets.
    std::vector<std::vector<MultiIndex>> left(N), right(N);
    left[0] = {MultiIndex{}};
    right[N - 1] = {MultiIndex{}};
    const Index start_rank = std::min(cfg.initial_rank, cfg.max_rank);
    for (Index k = N - 1; k-- > 0;) {
        const Index target = std::min(start_rank, sizes[k + 1] * right[k + 1].size());
        std::set<MultiIndex> seen;
        while (right[k].size() < target) {
            const Index i = std::uniform_int_distribution<Index>(0, sizes[k + 1] - 1)(rng);
            const Index b = std::uniform_int_distribution<Index>(0, right[k + 1].size() - 1)(rng);
            MultiIndex s{i};
            s.insert(s.end(), right[k + 1][b].begin(), right[k + 1][b].end());
            if (seen.insert(s).second) right[k].push_back(std::move(s));
        }
    }

    auto fiber = [&](Index k) {
        const Index r = left[k].size();
        const Index c = right[k].size();
        std::vector<MultiIndex> idx;
        idx.reserve(r * sizes[k] * c);
        for (Index a = 0; a < r; ++a)
            for (Index i = 0; i < sizes[k]; ++i)
                for (Index b = 0; b < c; ++b) idx.push_back(detail::join_index(left[k][a], i, right[k][b]));
        return sampler.fetch(idx);  // row-major (a, i, b)
    };

    std::vector<Core> cores(N);
    std::optional<TTTensor> best;
    double best_error = std::numeric_limits<double>::infinity();
    double previous_error = std::numeric_limits<double>::infinity();

    for (Index sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
        if (sweep > 0 && report.error_history.back() > 0.9 * previous_error) {
            for (Index k = 0; k + 1 < N; ++k) {
                const Index target = std::min(
                    {right[k].size() + cfg.kick_rank, cfg.max_rank, detail::suffix_count(sizes, k, cfg.max_rank)});
                std::set<MultiIndex> seen(right[k].begin(), right[k].end());
                for (Index attempt = 0; right[k].size() < target && attempt < 64 * cfg.kick_rank; ++attempt) {
                    auto s = random_suffix(k);
                    if (seen.insert(s).second) right[k].push_back(std::move(s));
                }
            }
        }
        if (sweep > 0) previous_error = report.error_history.back();

        // Left to right.
        for (Index k = 0; k + 1 < N; ++k) {
            const Index r = left[k].size();
            const Index c = right[k].size();
            const auto values = fiber(k);
            Eigen::MatrixXd F = Eigen::Map<const RowMatrix>(values.data(), static_cast<Eigen::Index>(r * sizes[k]),
                                                            static_cast<Eigen::Index>(c));
            const Eigen::MatrixXd Q = detail::thin_q(F);
            const auto mv = maxvol(Q, cfg.maxvol_tol);
            report.maxvol_fallbacks += mv.fallback ? 1 : 0;
            const RowMatrix B = detail::interpolation_matrix(Q, mv.rows);
            cores[k] = Core::from_left_unfolding(B, r, sizes[k]);
            std::vector<MultiIndex> next;
            for (Index s : mv.rows) {
                MultiIndex p = left[k][s / sizes[k]];
                p.push_back(s % sizes[k]);
                next.push_back(std::move(p));
            }
            left[k + 1] = std::move(next);
        }
        {
            const auto values = fiber(N - 1);
            cores[N - 1] = Core(left[N - 1].size(), sizes[N - 1], 1, values);
        }

        // Right to left.
        for (Index k = N - 1; k > 0; --k) {
            const Index r = left[k].size();
            const Index c = right[k].size();
            const auto values = fiber(k);
            Eigen::MatrixXd F = Eigen::Map<const RowMatrix>(values.data(), static_cast<Eigen::Index>(r),
                                                            static_cast<Eigen::Index>(sizes[k] * c))
                                    .transpose();
            const Eigen::MatrixXd Q = detail::thin_q(F);
            const auto mv = maxvol(Q, cfg.maxvol_tol);
            report.maxvol_fallbacks += mv.fallback ? 1 : 0;
            const RowMatrix Bt = detail::interpolation_matrix(Q, mv.rows).transpose();
            cores[k] = Core::from_right_unfolding(Bt, sizes[k], c);
            std::vector<MultiIndex> next;
            for (Index s : mv.rows) {
                MultiIndex p{s / c};
                p.insert(p.end(), right[k][s % c].begin(), right[k][s % c].end());
                next.push_back(std::move(p));
            }
            right[k - 1] = std::move(next);
        }
        {
            const auto values = fiber(0);
            cores[0] = Core(1, sizes[0], right[0].size(), values);
        }

        TTTensor current(cores);
        const double err = validation_error(current);
        report.error_history.push_back(err);
        report.sweeps = sweep + 1;
        if (err < best_error) {
            best_error = err;
            best = std::move(current);
        }
        if (err <= cfg.val_rel_tol) break;
    }

    TTTensor result = round(*best, cfg.final_round_tol);
    report.val_error = validation_error(result);
    report.converged = report.val_error <= cfg.val_rel_tol;
    report.ranks = result.ranks();
    report.eval_count = sampler.calls();
    return {std::move(result), std::move(report)};
}

}  // namespace ttsense
