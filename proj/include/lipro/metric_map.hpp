#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "lipro/metric_space.hpp"

namespace lipro {

/// A bijection between two finite metric spaces, given as an index
/// assignment: point i of the source maps to point assignment[i] of the
/// target. Equal cardinalities are required; every bijection between finite
/// metric spaces is bi-Lipschitz.
class MetricMap {
public:
    MetricMap(SpacePtr source, SpacePtr target, std::vector<std::size_t> assignment)
        : source_(std::move(source)), target_(std::move(target)),
          assignment_(std::move(assignment)) {
        if (!source_ || !target_) throw std::invalid_argument("map needs source and target");
        const std::size_t n = source_->size();
        if (target_->size() != n) {
            throw std::invalid_argument("map requires equal cardinalities");
        }
        if (assignment_.size() != n) {
            throw std::invalid_argument("assignment length does not match space size");
        }
        std::vector<bool> seen(n, false);
        for (std::size_t v : assignment_) {
            if (v >= n || seen[v]) throw std::invalid_argument("assignment is not a bijection");
            seen[v] = true;
        }
    }

    static MetricMap identity(SpacePtr space) {
        std::vector<std::size_t> id(space->size());
        std::iota(id.begin(), id.end(), std::size_t{0});
        SpacePtr copy = space;
        return MetricMap(std::move(space), std::move(copy), std::move(id));
    }

    const SpacePtr& source() const { return source_; }
    const SpacePtr& target() const { return target_; }
    const std::vector<std::size_t>& assignment() const { return assignment_; }
    std::size_t size() const { return assignment_.size(); }

    std::size_t apply(std::size_t i) const { return assignment_[i]; }

    MetricMap inverse() const {
        std::vector<std::size_t> inv(assignment_.size());
        for (std::size_t i = 0; i < assignment_.size(); ++i) inv[assignment_[i]] = i;
        return MetricMap(target_, source_, std::move(inv));
    }

    /// g after f; requires f.target == g.source structurally.
    static MetricMap compose(const MetricMap& g, const MetricMap& f) {
        if (*f.target() != *g.source()) {
            throw std::invalid_argument("composition mismatch: target of f differs from source of g");
        }
        std::vector<std::size_t> comp(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) comp[i] = g.apply(f.apply(i));
        return MetricMap(f.source(), g.target(), std::move(comp));
    }

private:
    SpacePtr source_;
    SpacePtr target_;
    std::vector<std::size_t> assignment_;
};

/// Smallest Lipschitz constant of f: max over pairs x != y of
/// d(f(x), f(y)) / d(x, y). Undefined below two points.
inline double dilation(const MetricMap& f) {
    const std::size_t n = f.size();
    if (n < 2) throw std::invalid_argument("dilation undefined below two points");
    const FiniteMetricSpace& src = *f.source();
    const FiniteMetricSpace& tgt = *f.target();
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            best = std::max(best, tgt.dist(f.apply(i), f.apply(j)) / src.dist(i, j));
        }
    }
    return best;
}

/// |log dil(f)| + |log dil(f^-1)|; f is an eps-isometry iff this is <= eps.
inline double isometry_defect(const MetricMap& f) {
    const std::size_t n = f.size();
    if (n < 2) throw std::invalid_argument("dilation undefined below two points");
    const FiniteMetricSpace& src = *f.source();
    const FiniteMetricSpace& tgt = *f.target();
    // dil(f) is the max distance ratio, dil(f^-1) the reciprocal of the min.
    double rmax = 0.0;
    double rmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double r = tgt.dist(f.apply(i), f.apply(j)) / src.dist(i, j);
            rmax = std::max(rmax, r);
            rmin = std::min(rmin, r);
        }
    }
    return std::abs(std::log(rmax)) + std::abs(std::log(1.0 / rmin));
}

}  // namespace lipro
