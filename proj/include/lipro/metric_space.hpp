#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lipro {

/// Absolute tolerance used by input validation throughout the library.
inline constexpr double kValidationTol = 1e-12;

/// A finite metric space: labelled points plus a full distance matrix.
///
/// Construction validates symmetry, a zero diagonal, strictly positive
/// off-diagonal entries and the triangle inequality (within kValidationTol).
/// Inputs violating the triangle inequality are rejected, not repaired.
/// Instances are immutable after construction and safe for concurrent reads.
class FiniteMetricSpace {
public:
    FiniteMetricSpace(std::vector<std::string> points,
                      std::vector<std::vector<double>> dist)
        : points_(std::move(points)) {
        const std::size_t n = points_.size();
        if (n == 0) {
            throw std::invalid_argument("metric space needs at least one point");
        }
        if (dist.size() != n) {
            throw std::invalid_argument("distance matrix size does not match point count");
        }
        dist_.resize(n * n);
        for (std::size_t i = 0; i < n; ++i) {
            if (dist[i].size() != n) {
                throw std::invalid_argument("distance matrix is not square");
            }
            for (std::size_t j = 0; j < n; ++j) {
                dist_[i * n + j] = dist[i][j];
            }
        }
        validate();
    }

    std::size_t size() const { return points_.size(); }

    const std::string& label(std::size_t i) const { return points_.at(i); }

    const std::vector<std::string>& labels() const { return points_; }

    double dist(std::size_t i, std::size_t j) const {
        return dist_[i * size() + j];
    }

    double diameter() const {
        double d = 0.0;
        for (double v : dist_) d = std::max(d, v);
        return d;
    }

    bool operator==(const FiniteMetricSpace& other) const {
        return points_ == other.points_ && dist_ == other.dist_;
    }
    bool operator!=(const FiniteMetricSpace& other) const { return !(*this == other); }

    /// Same distance matrix regardless of labels.
    bool same_geometry(const FiniteMetricSpace& other) const {
        return points_.size() == other.points_.size() && dist_ == other.dist_;
    }

    /// Cycle graph C_n with the shortest-path metric, scaled so the total
    /// circumference is `circumference` (edge length = circumference / n).
    static FiniteMetricSpace cycle(std::size_t n, double circumference,
                                   const std::string& label_prefix = "v") {
        if (n < 3) throw std::invalid_argument("cycle needs at least 3 nodes");
        if (!(circumference > 0.0)) throw std::invalid_argument("circumference must be positive");
        const double edge = circumference / static_cast<double>(n);
        std::vector<std::string> labels(n);
        std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            labels[i] = label_prefix + std::to_string(i);
            for (std::size_t j = 0; j < n; ++j) {
                const std::size_t hop = i > j ? i - j : j - i;
                const std::size_t wrap = n - hop;
                d[i][j] = edge * static_cast<double>(hop < wrap ? hop : wrap);
            }
        }
        return FiniteMetricSpace(std::move(labels), std::move(d));
    }

    /// Euclidean point cloud in R^k; handy for generating valid test spaces.
    static FiniteMetricSpace from_points(const std::vector<std::vector<double>>& pts,
                                         const std::string& label_prefix = "p") {
        const std::size_t n = pts.size();
        std::vector<std::string> labels(n);
        std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            labels[i] = label_prefix + std::to_string(i);
            for (std::size_t j = i + 1; j < n; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < pts[i].size(); ++k) {
                    const double diff = pts[i][k] - pts[j][k];
                    s += diff * diff;
                }
                d[i][j] = d[j][i] = std::sqrt(s);
            }
        }
        return FiniteMetricSpace(std::move(labels), std::move(d));
    }

private:
    void validate() const {
        const std::size_t n = size();
        for (std::size_t i = 0; i < n; ++i) {
            if (dist(i, i) != 0.0) {
                throw std::invalid_argument("nonzero diagonal entry at point " + points_[i]);
            }
            for (std::size_t j = 0; j < n; ++j) {
                const double d = dist(i, j);
                if (!std::isfinite(d)) {
                    throw std::invalid_argument("non-finite distance entry");
                }
                if (i != j && !(d > 0.0)) {
                    throw std::invalid_argument("non-positive distance between distinct points " +
                                                points_[i] + ", " + points_[j]);
                }
                if (std::abs(d - dist(j, i)) != 0.0) {
                    throw std::invalid_argument("distance matrix is not symmetric");
                }
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                for (std::size_t k = 0; k < n; ++k) {
                    if (dist(i, k) > dist(i, j) + dist(j, k) + kValidationTol) {
                        throw std::invalid_argument("triangle inequality violated at (" +
                                                    points_[i] + ", " + points_[j] + ", " +
                                                    points_[k] + ")");
                    }
                }
            }
        }
    }

    std::vector<std::string> points_;
    std::vector<double> dist_;  // row-major n*n
};

using SpacePtr = std::shared_ptr<const FiniteMetricSpace>;

inline SpacePtr make_space(FiniteMetricSpace s) {
    return std::make_shared<const FiniteMetricSpace>(std::move(s));
}

}  // namespace lipro
