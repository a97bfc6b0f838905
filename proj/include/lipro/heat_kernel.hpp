#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace lipro {

/// Heat kernel of standard Brownian motion (generator half the Laplacian)
/// on a circle of the given circumference, as a density with respect to
/// arclength: the wrapped Gaussian sum over images, truncated symmetrically
/// once terms drop below 1e-16 of the running sum.
inline double wrapped_heat_kernel(double t, double x, double y, double circumference) {
    if (!(t > 0.0)) throw std::invalid_argument("heat kernel needs t > 0");
    const double L = circumference;
    double d = std::fmod(y - x, L);
    if (d > L / 2.0) d -= L;
    if (d <= -L / 2.0) d += L;
    const double norm = 1.0 / std::sqrt(2.0 * M_PI * t);
    double sum = norm * std::exp(-d * d / (2.0 * t));
    for (int m = 1;; ++m) {
        const double a = d + m * L;
        const double b = d - m * L;
        const double term =
            norm * (std::exp(-a * a / (2.0 * t)) + std::exp(-b * b / (2.0 * t)));
        sum += term;
        if (term < 1e-16 * sum) break;
    }
    return sum;
}

/// log of the wrapped heat kernel via log-sum-exp; usable far in the tails
/// where the density itself underflows.
inline double log_wrapped_heat_kernel(double t, double x, double y, double circumference) {
    if (!(t > 0.0)) throw std::invalid_argument("heat kernel needs t > 0");
    const double L = circumference;
    double d = std::fmod(y - x, L);
    if (d > L / 2.0) d -= L;
    if (d <= -L / 2.0) d += L;
    const double lognorm = -0.5 * std::log(2.0 * M_PI * t);
    const int images = 2 + static_cast<int>(std::ceil(std::sqrt(1600.0 * t) / L));
    double max_e = -std::numeric_limits<double>::infinity();
    std::vector<double> exps;
    exps.reserve(2 * images + 1);
    for (int m = -images; m <= images; ++m) {
        const double a = d + m * L;
        const double e = -a * a / (2.0 * t);
        exps.push_back(e);
        max_e = std::max(max_e, e);
    }
    double acc = 0.0;
    for (double e : exps) acc += std::exp(e - max_e);
    return lognorm + max_e + std::log(acc);
}

/// Family constants for circle / flat-torus diffusion studies: dimension,
/// curvature bound (0 for flat families), volume bounds, diameter bound and
/// the ellipticity constant.
struct ManifoldFamilyParams {
    int n = 1;
    double K = 0.0;
    double V = 0.0;
    double D = 0.0;
    double Vprime = 0.0;
    double Lambda = 1.0;

    void validate() const {
        if (n < 1 || n > 2) throw std::invalid_argument("only dimensions 1 and 2 are supported");
        if (!(D > 0.0)) throw std::invalid_argument("diameter bound must be positive");
        if (V > Vprime) throw std::invalid_argument("volume bounds must satisfy V <= Vprime");
        if (Lambda < 1.0) throw std::invalid_argument("ellipticity constant must be >= 1");
    }
};

/// The dominating function phi(xi, r) = C' / xi^(1+nu) * exp(-r^2 / (4 xi))
/// together with the horizon tau on which it dominates the heat kernel.
struct HeatKernelBound {
    double Cprime = 1.0;
    double nu = 3.0;
    double tau = 1.0;

    HeatKernelBound(double Cprime_, double nu_, double tau_)
        : Cprime(Cprime_), nu(nu_), tau(tau_) {
        if (!(nu > 2.0)) throw std::invalid_argument("phi bound requires nu > 2");
        if (!(Cprime >= 0.0)) throw std::invalid_argument("C' must be nonnegative");
        if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
    }

    double log_phi(double xi, double r) const {
        return std::log(Cprime) - (1.0 + nu) * std::log(xi) - r * r / (4.0 * xi);
    }

    double phi(double xi, double r) const {
        if (Cprime == 0.0) return 0.0;
        return std::exp(log_phi(xi, r));
    }

    /// xi maximizing phi(., r): the ridge r^2 / (4 (1 + nu)).
    double ridge(double r) const { return r * r / (4.0 * (1.0 + nu)); }
};

/// sup over r in (r_lo, r_hi], xi in (0, lambda] of phi. phi is decreasing
/// in r and unimodal in xi with its maximum on the ridge, so the supremum is
/// the closure value phi(min(lambda, ridge(r_lo)), r_lo); 0 on an empty
/// range. Requires r_lo > 0.
inline double phi_sup(const HeatKernelBound& bound, double lambda, double r_lo, double r_hi) {
    if (!(r_lo > 0.0)) throw std::invalid_argument("phi supremum needs a positive radius floor");
    if (!(lambda > 0.0)) throw std::invalid_argument("phi supremum needs lambda > 0");
    if (r_lo >= r_hi) return 0.0;
    const double xi = std::min(lambda, bound.ridge(r_lo));
    return bound.phi(xi, r_lo);
}

/// Table of sup_{r > eps, xi in (0, lambda]} phi(xi, r) over a decreasing
/// lambda grid; the radius range is clipped at the diameter bound D. The
/// quantitative content of the tightness condition: the values vanish as
/// lambda goes to 0.
inline std::vector<std::pair<double, double>> phi_tightness_limit(
    const HeatKernelBound& bound, double eps, double D, const std::vector<double>& lambda_grid) {
    if (!(eps > 0.0)) throw std::invalid_argument("tightness table needs eps > 0");
    std::vector<std::pair<double, double>> table;
    table.reserve(lambda_grid.size());
    for (double lambda : lambda_grid) {
        table.emplace_back(lambda, eps >= D ? 0.0 : phi_sup(bound, lambda, eps, D));
    }
    return table;
}

/// Default grid for the tightness table: geometric from lambda_max down.
inline std::vector<double> geometric_lambda_grid(double lambda_max, double factor,
                                                 std::size_t count) {
    std::vector<double> grid;
    grid.reserve(count);
    double v = lambda_max;
    for (std::size_t i = 0; i < count; ++i) {
        grid.push_back(v);
        v *= factor;
    }
    return grid;
}

/// Uniform bound for modulus-of-continuity probabilities over a window of
/// length lambda at threshold gamma:
///   2 V' sup_{xi in (0, lambda], r > gamma/2} phi(xi, r),
/// the final line of the tightness chain with the isometry defects taken to
/// vanish inside one family. The radius range is clipped at D.
inline double modulus_bound(const HeatKernelBound& bound, const ManifoldFamilyParams& params,
                            double lambda, double gamma) {
    params.validate();
    if (lambda > bound.tau) throw std::invalid_argument("modulus bound requires lambda <= tau");
    const double r_lo = gamma / 2.0;
    if (r_lo >= params.D) return 0.0;
    return 2.0 * params.Vprime * phi_sup(bound, lambda, r_lo, params.D);
}

}  // namespace lipro
