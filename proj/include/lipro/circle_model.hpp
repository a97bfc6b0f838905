#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "lipro/heat_kernel.hpp"
#include "lipro/metric_space.hpp"

namespace lipro {

/// Discretized circle: n equally spaced nodes on a circle of the given
/// circumference, carrying the shortest-path metric, arclength node measure
/// (cell length L/n per node) and a per-edge conductance profile. Edge j
/// connects nodes j and j+1 (mod n); profile values must stay within
/// [1/Lambda, Lambda] of uniform.
class CircleModel {
public:
    CircleModel(double circumference, std::size_t nodes, double lambda_band = 1.0,
                std::vector<double> profile = {})
        : circumference_(circumference), nodes_(nodes), lambda_band_(lambda_band),
          profile_(std::move(profile)) {
        if (nodes_ < 3) throw std::invalid_argument("circle model needs at least 3 nodes");
        if (!(circumference_ > 0.0)) throw std::invalid_argument("circumference must be positive");
        if (lambda_band_ < 1.0) throw std::invalid_argument("ellipticity band must be >= 1");
        if (profile_.empty()) profile_.assign(nodes_, 1.0);
        if (profile_.size() != nodes_) {
            throw std::invalid_argument("conductance profile needs one entry per edge");
        }
        for (double c : profile_) {
            if (!(c >= 1.0 / lambda_band_ && c <= lambda_band_)) {
                throw std::invalid_argument("conductance profile leaves the ellipticity band");
            }
        }
        space_ = make_space(FiniteMetricSpace::cycle(nodes_, circumference_));
    }

    double circumference() const { return circumference_; }
    std::size_t nodes() const { return nodes_; }
    double lambda_band() const { return lambda_band_; }
    const std::vector<double>& profile() const { return profile_; }
    const SpacePtr& space() const { return space_; }

    double spacing() const { return circumference_ / static_cast<double>(nodes_); }
    double position(std::size_t j) const { return spacing() * static_cast<double>(j); }

    /// Conductance of edge (j, j+1): scaled so that uniform profile recovers
    /// the discrete half-Laplacian of the circle.
    double conductance(std::size_t edge) const {
        return profile_[edge] * static_cast<double>(nodes_) / circumference_;
    }
    /// Arclength node measure (raw volume).
    double node_measure(std::size_t) const { return spacing(); }

    /// Nearest node to the position y (any real, wrapped); exact midpoint
    /// ties go to the lower node index.
    std::size_t snap(double y) const {
        const double u = y / spacing();
        const double lo = std::floor(u);
        const double frac = u - lo;
        long long k;
        if (frac > 0.5) {
            k = static_cast<long long>(lo) + 1;
        } else if (frac < 0.5) {
            k = static_cast<long long>(lo);
        } else {
            const long long n = static_cast<long long>(nodes_);
            long long a = ((static_cast<long long>(lo) % n) + n) % n;
            long long b = ((a + 1) % n + n) % n;
            return static_cast<std::size_t>(std::min(a, b));
        }
        const long long n = static_cast<long long>(nodes_);
        return static_cast<std::size_t>(((k % n) + n) % n);
    }

    /// Exact displacement distribution of one snapped Brownian step from a
    /// node center: P(Delta) for Delta = 0..n-1, from Gaussian cell masses
    /// summed over wrap images. variance = 0 returns the point mass at 0.
    std::vector<double> step_distribution(double variance) const {
        std::vector<double> p(nodes_, 0.0);
        if (variance == 0.0) {
            p[0] = 1.0;
            return p;
        }
        const double sigma = std::sqrt(variance);
        const double w = spacing();
        const double L = circumference_;
        const int images = 2 + static_cast<int>(std::ceil((8.0 * sigma + L) / L));
        auto Phi = [](double z) { return 0.5 * (1.0 + std::erf(z / std::sqrt(2.0))); };
        const long long n = static_cast<long long>(nodes_);
        for (long long delta = -n / 2; delta <= (n - 1) / 2; ++delta) {
            double mass = 0.0;
            for (int m = -images; m <= images; ++m) {
                const double lo = (static_cast<double>(delta) - 0.5) * w + m * L;
                const double hi = (static_cast<double>(delta) + 0.5) * w + m * L;
                mass += Phi(hi / sigma) - Phi(lo / sigma);
            }
            p[static_cast<std::size_t>(((delta % n) + n) % n)] = mass;
        }
        return p;
    }

    /// Hop count between nodes along the cycle.
    std::size_t hop(std::size_t i, std::size_t j) const {
        const std::size_t d = i > j ? i - j : j - i;
        return std::min(d, nodes_ - d);
    }

private:
    double circumference_;
    std::size_t nodes_;
    double lambda_band_;
    std::vector<double> profile_;
    SpacePtr space_;
};

struct DominationResult {
    bool pass = false;
    double log_violation = 0.0;   // max over the grid of log p - log phi
    double minimal_Cprime = 0.0;  // least C' making the domination hold at this nu
};

/// Checks p(t, x, y) <= phi(t, d(x, y)) over a time grid and all node pair
/// distances of the circle; also reports the least feasible C' at the
/// bound's nu (calibration mode). Evaluated in logs so that deep Gaussian
/// tails do not underflow.
inline DominationResult kernel_domination_check(const CircleModel& model,
                                                const HeatKernelBound& bound,
                                                const std::vector<double>& t_grid) {
    if (t_grid.empty()) throw std::invalid_argument("domination check needs a time grid");
    double max_exponent = -std::numeric_limits<double>::infinity();
    const double L = model.circumference();
    for (double t : t_grid) {
        if (!(t > 0.0)) throw std::invalid_argument("domination grid times must be positive");
        for (std::size_t h = 0; h <= model.nodes() / 2; ++h) {
            const double r = model.spacing() * static_cast<double>(h);
            const double logp = log_wrapped_heat_kernel(t, 0.0, r, L);
            // log C' needed at (t, r): log p + (1+nu) log t + r^2/(4t)
            const double e = logp + (1.0 + bound.nu) * std::log(t) + r * r / (4.0 * t);
            max_exponent = std::max(max_exponent, e);
        }
    }
    DominationResult out;
    out.minimal_Cprime = std::exp(max_exponent);
    const double logC = bound.Cprime > 0.0 ? std::log(bound.Cprime)
                                           : -std::numeric_limits<double>::infinity();
    out.log_violation = max_exponent - logC;
    out.pass = out.log_violation <= 1e-12;
    return out;
}

}  // namespace lipro
