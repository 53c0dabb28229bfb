#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "ttsense/errors.hpp"
#include "ttsense/model_space.hpp"
#include "ttsense/tt_tensor.hpp"

namespace ttsense {

/// Evaluates rows of `x` (M x N, one input point per row) into `out` (length M).
using BatchFunction = std::function<void(const RowMatrix& x, std::span<double> out)>;

/// Batch-evaluable black box. Copies share the evaluation counter and workers.
///
/// With several workers a batch is split into contiguous chunks, one per
/// worker; each worker runs on its own thread and owns its BatchFunction, so
/// results never depend on the partition.
class EvaluatorHandle {
public:
    EvaluatorHandle(Index arity, std::vector<BatchFunction> workers, std::string description = "")
        : state_(std::make_shared<State>()) {
        if (arity < 1) throw DomainError("EvaluatorHandle: arity must be >= 1");
        if (workers.empty()) throw DomainError("EvaluatorHandle: at least one worker is required");
        state_->arity = arity;
        state_->workers = std::move(workers);
        state_->description = std::move(description);
    }

    /// Wraps a pointwise function; `threads` copies of it evaluate chunks in parallel.
    static EvaluatorHandle from_point_function(Index arity, std::function<double(std::span<const double>)> f,
                                               Index threads = 1, std::string description = "") {
        BatchFunction batch = [f = std::move(f)](const RowMatrix& x, std::span<double> out) {
            std::vector<double> row(static_cast<Index>(x.cols()));
            for (Eigen::Index m = 0; m < x.rows(); ++m) {
                for (Eigen::Index n = 0; n < x.cols(); ++n) row[static_cast<Index>(n)] = x(m, n);
                out[static_cast<Index>(m)] = f(row);
            }
        };
        return EvaluatorHandle(arity, std::vector<BatchFunction>(std::max<Index>(threads, 1), batch),
                               std::move(description));
    }

    [[nodiscard]] Index arity() const noexcept { return state_->arity; }
    [[nodiscard]] Index workers() const noexcept { return state_->workers.size(); }
    [[nodiscard]] std::uint64_t eval_count() const noexcept { return state_->count.load(); }
    [[nodiscard]] const std::string& description() const noexcept { return state_->description; }

    std::vector<double> evaluate_batch(const RowMatrix& x) const {
        if (static_cast<Index>(x.cols()) != state_->arity) {
            throw ShapeError("evaluate_batch: expected " + std::to_string(state_->arity) + " columns, got " +
                             std::to_string(x.cols()));
        }
        const Index rows = static_cast<Index>(x.rows());
        std::vector<double> out(rows, 0.0);
        if (rows == 0) return out;
        std::lock_guard lock(state_->mutex);
        const Index used = std::min(state_->workers.size(), rows);
        if (used == 1) {
            state_->workers.front()(x, out);
        } else {
            const Index chunk = (rows + used - 1) / used;
            std::vector<std::exception_ptr> errors(used);
            std::vector<std::thread> threads;
            for (Index w = 0; w < used; ++w) {
                const Index begin = w * chunk;
                const Index end = std::min(rows, begin + chunk);
                if (begin >= end) break;
                threads.emplace_back([&, w, begin, end] {
                    try {
                        RowMatrix part = x.middleRows(static_cast<Eigen::Index>(begin),
                                                      static_cast<Eigen::Index>(end - begin));
                        state_->workers[w](part, std::span<double>(out).subspan(begin, end - begin));
                    } catch (...) {
                        errors[w] = std::current_exception();
                    }
                });
            }
            for (auto& t : threads) t.join();
            for (auto& e : errors)
                if (e) std::rethrow_exception(e);
        }
        state_->count += rows;
        return out;
    }

    double evaluate(std::span<const double> point) const {
        RowMatrix x(1, static_cast<Eigen::Index>(point.size()));
        for (Index n = 0; n < point.size(); ++n) x(0, static_cast<Eigen::Index>(n)) = point[n];
        return evaluate_batch(x).front();
    }

private:
    struct State {
        Index arity = 0;
        std::vector<BatchFunction> workers;
        std::string description;
        std::atomic<std::uint64_t> count{0};
        std::mutex mutex;
    };
    std::shared_ptr<State> state_;
};

// ---------------------------------------------------------------------------
// Sobol G function

inline double sobol_g(std::span<const double> x, std::span<const double> a) {
    if (x.size() != a.size()) throw ShapeError("sobol_g: x and a must have the same length");
    double value = 1.0;
    for (Index n = 0; n < x.size(); ++n) {
        if (!(x[n] >= 0.0 && x[n] <= 1.0)) throw DomainError("sobol_g: x outside the unit cube");
        if (!(a[n] >= 0.0)) throw DomainError("sobol_g: coefficients must be nonnegative");
        value *= (std::abs(4.0 * x[n] - 2.0) + a[n]) / (1.0 + a[n]);
    }
    return value;
}

struct GIndices {
    double first_order;
    double total;
};

/// Closed-form first-order and total index of every variable of the a = 0 G function
/// under the continuous uniform measure.
inline GIndices sobol_g_analytic_indices(Index N) {
    if (N < 1) throw DomainError("sobol_g_analytic_indices: N must be >= 1");
    const double growth = std::pow(4.0 / 3.0, static_cast<double>(N));
    const double first = 1.0 / (3.0 * (growth - 1.0));
    return {first, first * std::pow(4.0 / 3.0, static_cast<double>(N) - 1.0)};
}

inline EvaluatorHandle sobol_g_evaluator(std::vector<double> a, Index threads = 1) {
    const Index N = a.size();
    return EvaluatorHandle::from_point_function(
        N, [a = std::move(a)](std::span<const double> x) { return sobol_g(x, a); }, threads, "sobol_g");
}

/// N copies of uniform(0, 1) with `points` nodes each.
inline ModelSpace sobol_g_space(Index N, Index points) {
    return ModelSpace::uniform_copies(Distribution::uniform(0.0, 1.0), points, N, "x");
}

// ---------------------------------------------------------------------------
// Decay chain: 11 species, 10 decay rates, one explicit step per day.

inline constexpr Index kDecaySpecies = 11;
inline constexpr double kDecayLambdaMin = 0.00063281;
inline constexpr double kDecayLambdaMax = 0.00756736;
inline constexpr int kDecayDefaultDays = 730;

/// Amount of every species after `days` daily steps, starting from unit mass in species 1.
inline std::vector<double> decay_chain_state(std::span<const double> lambda, int days) {
    if (lambda.size() != kDecaySpecies - 1) throw ShapeError("decay_chain: expected 10 decay rates");
    if (days < 0) throw DomainError("decay_chain: time span must be nonnegative");
    for (double l : lambda)
        if (!(l >= 0.0 && l <= 1.0)) throw DomainError("decay_chain: decay rates must lie in [0, 1]");
    std::vector<double> m(kDecaySpecies, 0.0);
    m[0] = 1.0;
    std::array<double, kDecaySpecies - 1> flow{};
    for (int day = 0; day < days; ++day) {
        for (Index n = 0; n + 1 < kDecaySpecies; ++n) flow[n] = lambda[n] * m[n];
        for (Index n = 0; n + 1 < kDecaySpecies; ++n) {
            m[n] -= flow[n];
            m[n + 1] += flow[n];
        }
    }
    return m;
}

inline double decay_chain(std::span<const double> lambda, int days) {
    return decay_chain_state(lambda, days).back();
}

inline EvaluatorHandle decay_chain_evaluator(int days = kDecayDefaultDays, Index threads = 1) {
    if (days < 1) throw DomainError("decay_chain: time span must be >= 1 day");
    return EvaluatorHandle::from_point_function(
        kDecaySpecies - 1, [days](std::span<const double> x) { return decay_chain(x, days); }, threads,
        "decay_chain");
}

inline ModelSpace decay_chain_space(Index points) {
    return ModelSpace::uniform_copies(Distribution::uniform(kDecayLambdaMin, kDecayLambdaMax), points,
                                      kDecaySpecies - 1, "lambda");
}

}  // namespace ttsense
