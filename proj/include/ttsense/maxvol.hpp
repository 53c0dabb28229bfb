#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "ttsense/errors.hpp"
#include "ttsense/tt_tensor.hpp"

namespace ttsense {

struct MaxvolResult {
    std::vector<Index> rows;
    /// True when the matrix was rank deficient and the rows come straight
    /// from column-pivoted QR without swap refinement.
    bool fallback = false;
    Index swaps = 0;
};

/// Rows of a tall K x R matrix whose R x R submatrix is quasi-dominant:
/// every entry of m * inverse(m[rows]) is at most 1 + tol in magnitude.
inline MaxvolResult maxvol(const Eigen::MatrixXd& m, double tol = 0.05, Index max_swaps = 0) {
    const auto K = m.rows();
    const auto R = m.cols();
    if (K < R) throw ShapeError("maxvol: need at least as many rows as columns");
    MaxvolResult result;
    if (R == 0) return result;

    // Initial guess: pivot columns of the transposed matrix.
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m.transpose());
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index j = 0; j < R; ++j) result.rows.push_back(static_cast<Index>(perm(j)));

    Eigen::MatrixXd sub(R, R);
    for (Eigen::Index j = 0; j < R; ++j) sub.row(j) = m.row(static_cast<Eigen::Index>(result.rows[j]));
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
    lu.setThreshold(1e-13);
    if (!lu.isInvertible()) {
        result.fallback = true;
        return result;
    }
    // B = m * sub^{-1}, computed as solve(sub^T, m^T)^T.
    Eigen::MatrixXd B = sub.transpose().fullPivLu().solve(m.transpose()).transpose();

    if (max_swaps == 0) max_swaps = 100 * static_cast<Index>(R) + 100;
    while (result.swaps < max_swaps) {
        Eigen::Index i = 0;
        Eigen::Index j = 0;
        const double peak = B.cwiseAbs().maxCoeff(&i, &j);
        if (peak <= 1.0 + tol) break;
        result.rows[static_cast<Index>(j)] = static_cast<Index>(i);
        const double pivot = B(i, j);
        Eigen::VectorXd col = B.col(j) / pivot;
        Eigen::RowVectorXd row = B.row(i);
        row(j) -= 1.0;
        B.noalias() -= col * row;
        ++result.swaps;
    }
    return result;
}

}  // namespace ttsense
