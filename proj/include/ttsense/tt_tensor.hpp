#pragma once

// Tensor-train container and its compressed-domain algebra.
//
// A TT of order N is a chain of 3-way cores; core n has shape
// (R_{n-1}, I_n, R_n) and is stored row-major in that order. Entry
// T[i_1..i_N] is the product of slices core_1[:, i_1, :] ... core_N[:, i_N, :].
// R_0 is always 1. R_N is 1 unless the tensor has an open trailing rank, in
// which case the last bond carries K output channels (used by state masks).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ttsense/errors.hpp"

namespace ttsense {

using Index = std::size_t;
using MultiIndex = std::vector<Index>;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Default cap on dense materialization and exhaustive maximization (2^25 entries).
inline constexpr Index kDefaultDenseCap = Index{1} << 25;

class Core {
public:
    using ConstMap = Eigen::Map<const RowMatrix>;
    using ConstSliceMap = Eigen::Map<const RowMatrix, 0, Eigen::OuterStride<>>;

    Core() = default;

    Core(Index left, Index mode, Index right)
        : left_(left), mode_(mode), right_(right), data_(left * mode * right, 0.0) {}

    Core(Index left, Index mode, Index right, std::vector<double> data)
        : left_(left), mode_(mode), right_(right), data_(std::move(data)) {
        if (data_.size() != left * mode * right) {
            throw ShapeError("Core: data size does not match shape");
        }
    }

    /// Builds a core from its (left*mode, right) unfolding.
    static Core from_left_unfolding(const RowMatrix& m, Index left, Index mode) {
        if (static_cast<Index>(m.rows()) != left * mode) {
            throw ShapeError("Core::from_left_unfolding: row count mismatch");
        }
        return Core(left, mode, static_cast<Index>(m.cols()),
                    std::vector<double>(m.data(), m.data() + m.size()));
    }

    /// Builds a core from its (left, mode*right) unfolding.
    static Core from_right_unfolding(const RowMatrix& m, Index mode, Index right) {
        if (static_cast<Index>(m.cols()) != mode * right) {
            throw ShapeError("Core::from_right_unfolding: column count mismatch");
        }
        return Core(static_cast<Index>(m.rows()), mode, right,
                    std::vector<double>(m.data(), m.data() + m.size()));
    }

    [[nodiscard]] Index left_rank() const noexcept { return left_; }
    [[nodiscard]] Index mode_size() const noexcept { return mode_; }
    [[nodiscard]] Index right_rank() const noexcept { return right_; }
    [[nodiscard]] Index size() const noexcept { return data_.size(); }

    double& operator()(Index a, Index i, Index b) { return data_[(a * mode_ + i) * right_ + b]; }
    double operator()(Index a, Index i, Index b) const {
        return data_[(a * mode_ + i) * right_ + b];
    }

    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }
    [[nodiscard]] std::span<double> data() noexcept { return data_; }

    [[nodiscard]] ConstMap left_unfolding() const {
        return ConstMap(data_.data(), static_cast<Eigen::Index>(left_ * mode_),
                        static_cast<Eigen::Index>(right_));
    }
    [[nodiscard]] ConstMap right_unfolding() const {
        return ConstMap(data_.data(), static_cast<Eigen::Index>(left_),
                        static_cast<Eigen::Index>(mode_ * right_));
    }
    /// The (left, right) matrix selected by mode index i.
    [[nodiscard]] ConstSliceMap slice(Index i) const {
        return ConstSliceMap(data_.data() + i * right_, static_cast<Eigen::Index>(left_),
                             static_cast<Eigen::Index>(right_),
                             Eigen::OuterStride<>(static_cast<Eigen::Index>(mode_ * right_)));
    }

    friend bool operator==(const Core&, const Core&) = default;

private:
    Index left_ = 0;
    Index mode_ = 0;
    Index right_ = 0;
    std::vector<double> data_;
};

class TTTensor {
public:
    explicit TTTensor(std::vector<Core> cores, bool trailing_rank_open = false)
        : cores_(std::move(cores)), open_(trailing_rank_open) {
        validate();
    }

    /// Rank-1 all-ones tensor.
    static TTTensor ones(const std::vector<Index>& mode_sizes) {
        return constant(mode_sizes, 1.0);
    }
    static TTTensor zeros(const std::vector<Index>& mode_sizes) {
        return constant(mode_sizes, 0.0);
    }
    static TTTensor constant(const std::vector<Index>& mode_sizes, double value) {
        std::vector<Core> cores;
        cores.reserve(mode_sizes.size());
        for (Index n = 0; n < mode_sizes.size(); ++n) {
            Core c(1, mode_sizes[n], 1);
            const double v = n == 0 ? value : 1.0;
            for (Index i = 0; i < mode_sizes[n]; ++i) c(0, i, 0) = v;
            cores.push_back(std::move(c));
        }
        return TTTensor(std::move(cores));
    }
    /// Rank-1 tensor that is 1 at `index` and 0 elsewhere.
    static TTTensor delta(const std::vector<Index>& mode_sizes, const MultiIndex& index) {
        if (index.size() != mode_sizes.size()) throw RangeError("delta: index length mismatch");
        std::vector<Core> cores;
        for (Index n = 0; n < mode_sizes.size(); ++n) {
            if (index[n] >= mode_sizes[n]) throw RangeError("delta: index out of range");
            Core c(1, mode_sizes[n], 1);
            c(0, index[n], 0) = 1.0;
            cores.push_back(std::move(c));
        }
        return TTTensor(std::move(cores));
    }
    /// Rank-1 tensor from per-mode vectors (outer product).
    static TTTensor rank1(const std::vector<std::vector<double>>& factors) {
        std::vector<Core> cores;
        for (const auto& f : factors) cores.emplace_back(1, f.size(), 1, f);
        return TTTensor(std::move(cores));
    }

    [[nodiscard]] Index order() const noexcept { return cores_.size(); }
    [[nodiscard]] const std::vector<Core>& cores() const noexcept { return cores_; }
    [[nodiscard]] const Core& core(Index n) const { return cores_.at(n); }
    [[nodiscard]] bool trailing_rank_open() const noexcept { return open_; }
    /// Width of the last bond: 1 for ordinary tensors, K for state tensors.
    [[nodiscard]] Index output_channels() const noexcept { return cores_.back().right_rank(); }

    [[nodiscard]] std::vector<Index> mode_sizes() const {
        std::vector<Index> s;
        s.reserve(cores_.size());
        for (const auto& c : cores_) s.push_back(c.mode_size());
        return s;
    }
    [[nodiscard]] std::vector<Index> ranks() const {
        std::vector<Index> r{1};
        for (const auto& c : cores_) r.push_back(c.right_rank());
        return r;
    }
    /// Largest internal bond rank (1 for N = 1).
    [[nodiscard]] Index max_rank() const {
        Index r = 1;
        for (Index n = 0; n + 1 < cores_.size(); ++n) r = std::max(r, cores_[n].right_rank());
        return r;
    }
    [[nodiscard]] Index parameter_count() const {
        Index s = 0;
        for (const auto& c : cores_) s += c.size();
        return s;
    }
    /// Number of entries of the dense tensor (saturates at SIZE_MAX).
    [[nodiscard]] Index dense_size() const {
        Index total = 1;
        for (const auto& c : cores_) {
            if (total > std::numeric_limits<Index>::max() / c.mode_size()) {
                return std::numeric_limits<Index>::max();
            }
            total *= c.mode_size();
        }
        return total;
    }

    friend bool operator==(const TTTensor&, const TTTensor&) = default;

private:
    void validate() const {
        if (cores_.empty()) throw ShapeError("TTTensor: at least one core is required");
        if (cores_.front().left_rank() != 1) throw ShapeError("TTTensor: R_0 must be 1");
        for (Index n = 0; n < cores_.size(); ++n) {
            const auto& c = cores_[n];
            if (c.mode_size() == 0) throw ShapeError("TTTensor: mode sizes must be positive");
            if (c.left_rank() == 0 || c.right_rank() == 0) {
                throw ShapeError("TTTensor: ranks must be positive");
            }
            if (n + 1 < cores_.size() && c.right_rank() != cores_[n + 1].left_rank()) {
                std::ostringstream os;
                os << "TTTensor: rank mismatch between cores " << n << " and " << n + 1;
                throw ShapeError(os.str());
            }
        }
        if (!open_ && cores_.back().right_rank() != 1) {
            throw ShapeError("TTTensor: R_N must be 1 unless the trailing rank is open");
        }
    }

    std::vector<Core> cores_;
    bool open_ = false;
};

namespace detail {

inline void require_same_modes(const TTTensor& a, const TTTensor& b, const char* op) {
    if (a.mode_sizes() != b.mode_sizes()) {
        throw ShapeError(std::string(op) + ": mode sizes differ");
    }
}

inline void require_closed(const TTTensor& a, const char* op) {
    if (a.trailing_rank_open()) {
        throw ShapeError(std::string(op) + ": operand has an open trailing rank");
    }
}

inline void check_index(const TTTensor& t, const MultiIndex& index) {
    if (index.size() != t.order()) throw RangeError("index length does not match tensor order");
    for (Index n = 0; n < index.size(); ++n) {
        if (index[n] >= t.core(n).mode_size()) {
            std::ostringstream os;
            os << "index " << index[n] << " out of range for mode " << n << " of size "
               << t.core(n).mode_size();
            throw RangeError(os.str());
        }
    }
}

// Contracts two conforming trains over all modes; returns the (R_N^a x R_N^b) boundary matrix.
inline Eigen::MatrixXd contract_pair(const TTTensor& a, const TTTensor& b) {
    Eigen::MatrixXd c = Eigen::MatrixXd::Ones(1, 1);
    for (Index n = 0; n < a.order(); ++n) {
        const Core& ca = a.core(n);
        const Core& cb = b.core(n);
        // t(a0, (i, b1)) = c(a0, b0) * B(b0, (i, b1)), viewed as ((a0, i), b1)
        RowMatrix t = c * cb.right_unfolding();
        Eigen::Map<const RowMatrix> tl(t.data(), static_cast<Eigen::Index>(ca.left_rank() * ca.mode_size()),
                                       static_cast<Eigen::Index>(cb.right_rank()));
        c = ca.left_unfolding().transpose() * tl;
    }
    return c;
}

}  // namespace detail

/// Entry at `index`: left-to-right product of the selected slices.
inline double evaluate(const TTTensor& t, const MultiIndex& index) {
    detail::require_closed(t, "evaluate");
    detail::check_index(t, index);
    Eigen::RowVectorXd v = Eigen::RowVectorXd::Ones(1);
    for (Index n = 0; n < t.order(); ++n) v = v * t.core(n).slice(index[n]);
    return v(0);
}

/// Output-channel vector of an open-trailing-rank tensor at `index`.
inline std::vector<double> evaluate_channels(const TTTensor& t, const MultiIndex& index) {
    detail::check_index(t, index);
    Eigen::RowVectorXd v = Eigen::RowVectorXd::Ones(1);
    for (Index n = 0; n < t.order(); ++n) v = v * t.core(n).slice(index[n]);
    return {v.data(), v.data() + v.size()};
}

/// Sum over all multi-indices of a[i] * b[i].
inline double dot(const TTTensor& a, const TTTensor& b) {
    detail::require_same_modes(a, b, "dot");
    detail::require_closed(a, "dot");
    detail::require_closed(b, "dot");
    return detail::contract_pair(a, b)(0, 0);
}

inline double norm(const TTTensor& a) { return std::sqrt(std::max(dot(a, a), 0.0)); }

/// Contracts `a` against a state tensor `m` over every mode; the result is the
/// vector left on m's open trailing edge.
inline std::vector<double> state_contract(const TTTensor& a, const TTTensor& m) {
    detail::require_same_modes(a, m, "state_contract");
    detail::require_closed(a, "state_contract");
    if (!m.trailing_rank_open()) {
        throw ShapeError("state_contract: mask must have an open trailing rank");
    }
    Eigen::MatrixXd c = detail::contract_pair(a, m);
    return {c.data(), c.data() + c.size()};
}

/// Exact entrywise product via slice-wise Kronecker products (ranks multiply).
inline TTTensor hadamard(const TTTensor& a, const TTTensor& b) {
    detail::require_same_modes(a, b, "hadamard");
    if (a.trailing_rank_open() && b.trailing_rank_open()) {
        throw ShapeError("hadamard: at most one operand may have an open trailing rank");
    }
    std::vector<Core> cores;
    cores.reserve(a.order());
    for (Index n = 0; n < a.order(); ++n) {
        const Core& x = a.core(n);
        const Core& y = b.core(n);
        Core c(x.left_rank() * y.left_rank(), x.mode_size(), x.right_rank() * y.right_rank());
        for (Index p = 0; p < x.left_rank(); ++p)
            for (Index q = 0; q < y.left_rank(); ++q)
                for (Index i = 0; i < x.mode_size(); ++i)
                    for (Index r = 0; r < x.right_rank(); ++r) {
                        const double xv = x(p, i, r);
                        if (xv == 0.0) continue;
                        for (Index s = 0; s < y.right_rank(); ++s) {
                            c(p * y.left_rank() + q, i, r * y.right_rank() + s) = xv * y(q, i, s);
                        }
                    }
        cores.push_back(std::move(c));
    }
    return TTTensor(std::move(cores), a.trailing_rank_open() || b.trailing_rank_open());
}

/// Entrywise sum; block-diagonal cores, ranks add.
inline TTTensor add(const TTTensor& a, const TTTensor& b) {
    detail::require_same_modes(a, b, "add");
    detail::require_closed(a, "add");
    detail::require_closed(b, "add");
    const Index N = a.order();
    std::vector<Core> cores;
    cores.reserve(N);
    for (Index n = 0; n < N; ++n) {
        const Core& x = a.core(n);
        const Core& y = b.core(n);
        const Index I = x.mode_size();
        if (N == 1) {
            Core c(1, I, 1);
            for (Index i = 0; i < I; ++i) c(0, i, 0) = x(0, i, 0) + y(0, i, 0);
            cores.push_back(std::move(c));
            continue;
        }
        const bool first = n == 0;
        const bool last = n + 1 == N;
        const Index left = first ? 1 : x.left_rank() + y.left_rank();
        const Index right = last ? 1 : x.right_rank() + y.right_rank();
        Core c(left, I, right);
        const Index yl = first ? 0 : x.left_rank();
        const Index yr = last ? 0 : x.right_rank();
        for (Index i = 0; i < I; ++i) {
            for (Index p = 0; p < x.left_rank(); ++p)
                for (Index r = 0; r < x.right_rank(); ++r) c(p, i, r) = x(p, i, r);
            for (Index p = 0; p < y.left_rank(); ++p)
                for (Index r = 0; r < y.right_rank(); ++r) c(yl + p, i, yr + r) = y(p, i, r);
        }
        cores.push_back(std::move(c));
    }
    return TTTensor(std::move(cores));
}

inline TTTensor scale(const TTTensor& a, double factor) {
    std::vector<Core> cores = a.cores();
    for (double& v : cores.front().data()) v *= factor;
    return TTTensor(std::move(cores), a.trailing_rank_open());
}

namespace detail {

inline Index truncation_rank(const Eigen::VectorXd& s, double delta, std::optional<Index> cap) {
    // smallest r >= 1 whose discarded tail has Frobenius norm <= delta
    const Index len = static_cast<Index>(s.size());
    Index r = len;
    double tail = 0.0;
    for (Index k = len; k-- > 1;) {
        const double next = tail + s(static_cast<Eigen::Index>(k)) * s(static_cast<Eigen::Index>(k));
        if (std::sqrt(next) > delta) break;
        tail = next;
        r = k;
    }
    r = std::max<Index>(r, 1);
    if (cap) r = std::max<Index>(1, std::min(r, *cap));
    return r;
}

}  // namespace detail

/// TT-SVD recompression: right-to-left QR orthogonalization, then a
/// left-to-right truncated SVD sweep with per-bond budget rel_tol/sqrt(N-1).
/// Guarantees ||a - result||_F <= rel_tol * ||a||_F when no max_rank cap bites.
inline TTTensor round(const TTTensor& a, double rel_tol, std::optional<Index> max_rank = std::nullopt) {
    if (rel_tol < 0.0 || std::isnan(rel_tol)) throw DomainError("round: rel_tol must be >= 0");
    const Index N = a.order();
    if (N == 1) return a;
    std::vector<Core> cores = a.cores();

    for (Index n = N - 1; n >= 1; --n) {
        const Index I = cores[n].mode_size();
        const Index r1 = cores[n].right_rank();
        const Eigen::MatrixXd mt = cores[n].right_unfolding().transpose();
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(mt);
        const auto k = std::min(mt.rows(), mt.cols());
        const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(mt.rows(), k);
        const Eigen::MatrixXd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
        cores[n] = Core::from_right_unfolding(q.transpose(), I, r1);
        const Core& prev = cores[n - 1];
        const RowMatrix merged = prev.left_unfolding() * r.transpose();
        cores[n - 1] = Core::from_left_unfolding(merged, prev.left_rank(), prev.mode_size());
    }

    const double total = Eigen::Map<const Eigen::VectorXd>(cores[0].data().data(),
                                                           static_cast<Eigen::Index>(cores[0].size()))
                             .norm();
    const double delta = rel_tol / std::sqrt(static_cast<double>(N - 1)) * total;

    for (Index n = 0; n + 1 < N; ++n) {
        const Core& c = cores[n];
        const Eigen::MatrixXd m = c.left_unfolding();
        Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Eigen::VectorXd& s = svd.singularValues();
        const Index r = detail::truncation_rank(s, delta, max_rank);
        const auto re = static_cast<Eigen::Index>(r);
        const RowMatrix u = svd.matrixU().leftCols(re);
        const RowMatrix sv = s.head(re).asDiagonal() * svd.matrixV().leftCols(re).transpose();
        const Core& next = cores[n + 1];
        const RowMatrix carried = sv * next.right_unfolding();
        const Index left = c.left_rank();
        const Index mode = c.mode_size();
        const Index next_mode = next.mode_size();
        const Index next_right = next.right_rank();
        cores[n] = Core::from_left_unfolding(u, left, mode);
        cores[n + 1] = Core::from_right_unfolding(carried, next_mode, next_right);
    }
    return TTTensor(std::move(cores), a.trailing_rank_open());
}

namespace detail {

// Partial products over modes [0, stop): rows enumerate prefixes in row-major
// order, columns are the bond-`stop` rank.
inline RowMatrix prefix_products(const TTTensor& t, Index stop) {
    RowMatrix d = RowMatrix::Ones(1, 1);
    for (Index n = 0; n < stop; ++n) {
        const Core& c = t.core(n);
        RowMatrix e = d * c.right_unfolding();
        d = Eigen::Map<const RowMatrix>(e.data(), static_cast<Eigen::Index>(d.rows() * c.mode_size()),
                                        static_cast<Eigen::Index>(c.right_rank()));
    }
    return d;
}

// Partial products over modes [start, N): columns enumerate suffixes in row-major order.
inline RowMatrix suffix_products(const TTTensor& t, Index start) {
    RowMatrix d = RowMatrix::Ones(1, 1);
    for (Index n = t.order(); n-- > start;) {
        const Core& c = t.core(n);
        RowMatrix e = c.left_unfolding() * d;
        d = Eigen::Map<const RowMatrix>(e.data(), static_cast<Eigen::Index>(c.left_rank()),
                                        static_cast<Eigen::Index>(c.mode_size() * d.cols()));
    }
    return d;
}

inline MultiIndex unflatten(Index flat, const std::vector<Index>& sizes) {
    MultiIndex idx(sizes.size());
    for (Index n = sizes.size(); n-- > 0;) {
        idx[n] = flat % sizes[n];
        flat /= sizes[n];
    }
    return idx;
}

}  // namespace detail

/// Dense row-major materialization (first mode most significant). For open
/// tensors the channel index is the fastest-varying one.
inline std::vector<double> full(const TTTensor& a, Index cap = kDefaultDenseCap) {
    const Index total = a.dense_size();
    if (total > cap / a.output_channels()) {
        std::ostringstream os;
        os << "full: " << total << " entries exceed the cap of " << cap;
        throw ResourceError(os.str());
    }
    const RowMatrix d = detail::prefix_products(a, a.order());
    return {d.data(), d.data() + d.size()};
}

struct MaxEntry {
    double value = 0.0;
    MultiIndex index;
};

/// Exact maximum over all entries, ties broken by the smallest row-major index.
///
/// Prefix partial products (one row per prefix) are multiplied against suffix
/// partial products one block of prefixes at a time, so memory stays at
/// O(sqrt(total) * rank) while every entry is still visited.
inline MaxEntry max_entry(const TTTensor& a, Index cap = kDefaultDenseCap) {
    detail::require_closed(a, "max_entry");
    const Index total = a.dense_size();
    if (total > cap) {
        std::ostringstream os;
        os << "max_entry: " << total << " entries exceed the exhaustive cap of " << cap
           << "; lower the number of variables or raise the cap";
        throw ResourceError(os.str());
    }
    const auto sizes = a.mode_sizes();
    const double target = std::sqrt(static_cast<double>(total));
    Index split = 0;
    double best_gap = std::numeric_limits<double>::infinity();
    double prefix = 1.0;
    for (Index s = 0; s <= a.order(); ++s) {
        const double gap = std::abs(std::log(prefix) - std::log(target));
        if (gap < best_gap) {
            best_gap = gap;
            split = s;
        }
        if (s < a.order()) prefix *= static_cast<double>(sizes[s]);
    }
    const RowMatrix left = detail::prefix_products(a, split);
    const RowMatrix right = detail::suffix_products(a, split);
    const auto suffixes = right.cols();
    const Eigen::Index block = std::max<Eigen::Index>(1, (Eigen::Index{1} << 16) / std::max<Eigen::Index>(1, suffixes));

    MaxEntry best{-std::numeric_limits<double>::infinity(), {}};
    Index best_flat = 0;
    for (Eigen::Index p0 = 0; p0 < left.rows(); p0 += block) {
        const Eigen::Index rows = std::min(block, left.rows() - p0);
        const RowMatrix values = left.middleRows(p0, rows) * right;
        for (Eigen::Index p = 0; p < rows; ++p) {
            for (Eigen::Index q = 0; q < suffixes; ++q) {
                const double v = values(p, q);
                if (v > best.value) {
                    best.value = v;
                    best_flat = static_cast<Index>((p0 + p) * suffixes + q);
                }
            }
        }
    }
    best.index = detail::unflatten(best_flat, sizes);
    return best;
}

/// Exact (rel_tol = 0) or truncated TT-SVD of a dense row-major tensor.
inline TTTensor from_dense(std::span<const double> data, const std::vector<Index>& shape,
                           double rel_tol = 0.0) {
    if (shape.empty()) throw ShapeError("from_dense: empty shape");
    Index total = 1;
    for (Index s : shape) total *= s;
    if (total != data.size()) throw ShapeError("from_dense: data size does not match shape");
    const Index N = shape.size();
    const double delta =
        N > 1 ? rel_tol / std::sqrt(static_cast<double>(N - 1)) *
                    Eigen::Map<const Eigen::VectorXd>(data.data(), static_cast<Eigen::Index>(total)).norm()
              : 0.0;
    std::vector<Core> cores;
    RowMatrix rest = Eigen::Map<const RowMatrix>(data.data(), 1, static_cast<Eigen::Index>(total));
    Index r_prev = 1;
    for (Index n = 0; n + 1 < N; ++n) {
        const Index cols = static_cast<Index>(rest.size()) / (r_prev * shape[n]);
        const RowMatrix m = Eigen::Map<const RowMatrix>(rest.data(), static_cast<Eigen::Index>(r_prev * shape[n]),
                                                        static_cast<Eigen::Index>(cols));
        Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Index r = detail::truncation_rank(svd.singularValues(), delta, std::nullopt);
        const auto re = static_cast<Eigen::Index>(r);
        cores.push_back(Core::from_left_unfolding(svd.matrixU().leftCols(re), r_prev, shape[n]));
        rest = svd.singularValues().head(re).asDiagonal() * svd.matrixV().leftCols(re).transpose();
        r_prev = r;
    }
    cores.emplace_back(r_prev, shape[N - 1], 1, std::vector<double>(rest.data(), rest.data() + rest.size()));
    return TTTensor(std::move(cores));
}

/// Random TT with entries uniform in [-1, 1] and the given internal rank.
inline TTTensor random_tt(const std::vector<Index>& mode_sizes, Index rank, std::mt19937_64& rng,
                          Index output_channels = 1) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Core> cores;
    const Index N = mode_sizes.size();
    for (Index n = 0; n < N; ++n) {
        const Index left = n == 0 ? 1 : rank;
        const Index right = n + 1 == N ? output_channels : rank;
        Core c(left, mode_sizes[n], right);
        for (double& v : c.data()) v = u(rng);
        cores.push_back(std::move(c));
    }
    return TTTensor(std::move(cores), output_channels != 1);
}

}  // namespace ttsense
