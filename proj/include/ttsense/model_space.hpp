#pragma once

// Independent input measure, discretized per axis by equal-weight quantile
// midpoints: node i of an axis with I points is F^{-1}((i + 0.5) / I) of the
// (truncated, renormalized) marginal, and every weight is 1 / I.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "ttsense/errors.hpp"
#include "ttsense/tt_tensor.hpp"

namespace ttsense {

enum class DistributionKind { uniform, normal, lognormal, scaled_lognormal };

inline std::string to_string(DistributionKind k) {
    switch (k) {
        case DistributionKind::uniform: return "uniform";
        case DistributionKind::normal: return "normal";
        case DistributionKind::lognormal: return "lognormal";
        case DistributionKind::scaled_lognormal: return "scaled_lognormal";
    }
    return "unknown";
}

/// Marginal of one input variable, optionally truncated to [lower, upper].
struct Distribution {
    DistributionKind kind = DistributionKind::uniform;
    /// (a, b) for uniform, (mu, sigma) otherwise.
    double first = 0.0;
    double second = 1.0;
    /// Multiplier c of a scaled lognormal (c * LogN(mu, sigma)).
    double scale = 1.0;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();

    static Distribution uniform(double a, double b) { return {DistributionKind::uniform, a, b}; }
    static Distribution normal(double mu, double sigma) { return {DistributionKind::normal, mu, sigma}; }
    static Distribution lognormal(double mu, double sigma) {
        return {DistributionKind::lognormal, mu, sigma};
    }
    static Distribution scaled_lognormal(double c, double mu, double sigma) {
        return {DistributionKind::scaled_lognormal, mu, sigma, c};
    }

    [[nodiscard]] Distribution truncated(double lo, double hi) const {
        Distribution d = *this;
        d.lower = lo;
        d.upper = hi;
        return d;
    }
    [[nodiscard]] bool is_truncated() const { return std::isfinite(lower) || std::isfinite(upper); }

    void validate() const {
        if (!std::isfinite(first) || !std::isfinite(second) || !std::isfinite(scale)) {
            throw DomainError("distribution parameters must be finite");
        }
        if (kind == DistributionKind::uniform && !(first < second)) {
            throw DomainError("uniform(a, b) requires a < b");
        }
        if (kind != DistributionKind::uniform && !(second > 0.0)) {
            throw DomainError(to_string(kind) + " requires sigma > 0");
        }
        if (kind == DistributionKind::scaled_lognormal && !(scale > 0.0)) {
            throw DomainError("scaled_lognormal requires c > 0");
        }
        if (!(lower < upper)) throw DomainError("truncation interval must satisfy lower < upper");
    }

    [[nodiscard]] std::string describe() const {
        std::ostringstream os;
        os.precision(17);
        switch (kind) {
            case DistributionKind::uniform: os << "uniform(" << first << ", " << second << ")"; break;
            case DistributionKind::normal: os << "normal(" << first << ", " << second << ")"; break;
            case DistributionKind::lognormal: os << "lognormal(" << first << ", " << second << ")"; break;
            case DistributionKind::scaled_lognormal:
                os << "scaled_lognormal(" << scale << ", " << first << ", " << second << ")";
                break;
        }
        if (is_truncated()) os << " truncated to [" << lower << ", " << upper << "]";
        return os.str();
    }
};

struct AxisGrid {
    std::vector<double> nodes;
    std::vector<double> weights;
    Distribution distribution;

    [[nodiscard]] Index size() const { return nodes.size(); }
};

namespace detail {

// Probability mass of the untruncated marginal below x, as the pair
// (P[X <= x], P[X > x]) so upper tails keep full precision.
struct TailPair {
    double below = 0.0;
    double above = 1.0;
};

inline TailPair standard_normal_tails(double z) {
    if (z == -std::numeric_limits<double>::infinity()) return {0.0, 1.0};
    if (z == std::numeric_limits<double>::infinity()) return {1.0, 0.0};
    const boost::math::normal_distribution<double> std_normal(0.0, 1.0);
    return {boost::math::cdf(std_normal, z), boost::math::cdf(boost::math::complement(std_normal, z))};
}

// Inverse of the standard normal using whichever tail is smaller.
inline double standard_normal_quantile(double below, double above) {
    const boost::math::normal_distribution<double> std_normal(0.0, 1.0);
    if (below <= 0.5) return boost::math::quantile(std_normal, below);
    return boost::math::quantile(boost::math::complement(std_normal, above));
}

inline double to_standard(const Distribution& d, double x) {
    switch (d.kind) {
        case DistributionKind::normal: return (x - d.first) / d.second;
        case DistributionKind::lognormal:
            return x <= 0.0 ? -std::numeric_limits<double>::infinity() : (std::log(x) - d.first) / d.second;
        case DistributionKind::scaled_lognormal:
            return x <= 0.0 ? -std::numeric_limits<double>::infinity()
                            : (std::log(x / d.scale) - d.first) / d.second;
        case DistributionKind::uniform: break;
    }
    return x;
}

inline double from_standard(const Distribution& d, double z) {
    switch (d.kind) {
        case DistributionKind::normal: return d.first + d.second * z;
        case DistributionKind::lognormal: return std::exp(d.first + d.second * z);
        case DistributionKind::scaled_lognormal: return d.scale * std::exp(d.first + d.second * z);
        case DistributionKind::uniform: break;
    }
    return z;
}

}  // namespace detail

/// Equal-weight quantile-midpoint grid of `points` nodes for `dist`.
inline AxisGrid build_axis(const Distribution& dist, Index points) {
    if (points < 1) throw DomainError("build_axis: points must be >= 1");
    dist.validate();
    AxisGrid axis;
    axis.distribution = dist;
    axis.nodes.resize(points);
    axis.weights.assign(points, 1.0 / static_cast<double>(points));
    const double count = static_cast<double>(points);

    if (dist.kind == DistributionKind::uniform) {
        const double lo = std::max(dist.first, dist.lower);
        const double hi = std::min(dist.second, dist.upper);
        if (!(hi > lo)) throw DomainError("build_axis: truncation interval has zero mass");
        for (Index i = 0; i < points; ++i) {
            axis.nodes[i] = lo + (hi - lo) * (static_cast<double>(i) + 0.5) / count;
        }
    } else {
        const auto lo = detail::standard_normal_tails(detail::to_standard(dist, dist.lower));
        const auto hi = detail::standard_normal_tails(detail::to_standard(dist, dist.upper));
        const double mass = std::min(hi.below - lo.below, lo.above - hi.above);
        if (!(mass > 1e-12)) throw DomainError("build_axis: truncation interval has ~zero mass");
        for (Index i = 0; i < points; ++i) {
            const double t = (static_cast<double>(i) + 0.5) / count;
            const double below = lo.below + t * mass;
            const double above = hi.above + (1.0 - t) * mass;
            axis.nodes[i] = detail::from_standard(dist, detail::standard_normal_quantile(below, above));
        }
    }
    for (Index i = 1; i < points; ++i) {
        if (!(axis.nodes[i] > axis.nodes[i - 1])) {
            throw DomainError("build_axis: nodes are not strictly increasing (" + dist.describe() + ")");
        }
    }
    return axis;
}

class ModelSpace {
public:
    ModelSpace(std::vector<AxisGrid> axes, std::vector<std::string> names)
        : axes_(std::move(axes)), names_(std::move(names)) {
        if (axes_.empty()) throw DomainError("ModelSpace: at least one variable is required");
        if (names_.size() != axes_.size()) throw DomainError("ModelSpace: one name per axis is required");
        std::set<std::string> unique(names_.begin(), names_.end());
        if (unique.size() != names_.size()) throw DomainError("ModelSpace: variable names must be unique");
    }

    /// N identical axes named prefix1..prefixN.
    static ModelSpace uniform_copies(const Distribution& dist, Index points, Index count,
                                     const std::string& prefix = "x") {
        std::vector<AxisGrid> axes(count, build_axis(dist, points));
        std::vector<std::string> names;
        for (Index n = 0; n < count; ++n) names.push_back(prefix + std::to_string(n + 1));
        return ModelSpace(std::move(axes), std::move(names));
    }

    [[nodiscard]] Index dimension() const { return axes_.size(); }
    [[nodiscard]] const std::vector<AxisGrid>& axes() const { return axes_; }
    [[nodiscard]] const AxisGrid& axis(Index n) const { return axes_.at(n); }
    [[nodiscard]] const std::vector<std::string>& names() const { return names_; }
    [[nodiscard]] std::vector<Index> sizes() const {
        std::vector<Index> s;
        for (const auto& a : axes_) s.push_back(a.size());
        return s;
    }

private:
    std::vector<AxisGrid> axes_;
    std::vector<std::string> names_;
};

inline std::vector<double> index_to_point(const ModelSpace& space, const MultiIndex& index) {
    if (index.size() != space.dimension()) throw RangeError("index_to_point: index length mismatch");
    std::vector<double> x(index.size());
    for (Index n = 0; n < index.size(); ++n) {
        const auto& nodes = space.axis(n).nodes;
        if (index[n] >= nodes.size()) throw RangeError("index_to_point: index out of range");
        x[n] = nodes[index[n]];
    }
    return x;
}

/// Per-axis index of the node closest to each coordinate.
inline MultiIndex nearest_index(const ModelSpace& space, const std::vector<double>& point) {
    if (point.size() != space.dimension()) throw RangeError("nearest_index: point length mismatch");
    MultiIndex idx(point.size());
    for (Index n = 0; n < point.size(); ++n) {
        const auto& nodes = space.axis(n).nodes;
        auto it = std::lower_bound(nodes.begin(), nodes.end(), point[n]);
        Index hi = static_cast<Index>(it - nodes.begin());
        if (hi == nodes.size()) {
            idx[n] = hi - 1;
        } else if (hi == 0) {
            idx[n] = 0;
        } else {
            idx[n] = (point[n] - nodes[hi - 1] <= nodes[hi] - point[n]) ? hi - 1 : hi;
        }
    }
    return idx;
}

}  // namespace ttsense
