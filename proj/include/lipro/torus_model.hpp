#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "lipro/circle_model.hpp"
#include "lipro/dirichlet_form.hpp"
#include "lipro/heat_kernel.hpp"
#include "lipro/metric_space.hpp"
#include "lipro/path_space.hpp"
#include "lipro/sampling.hpp"

namespace lipro {

/// Flat-torus discretization: an nx-by-ny grid on a torus with side lengths
/// Lx, Ly, carrying the flat geodesic metric (per-axis wrapped differences
/// combined Euclideanly) restricted to the grid points. Node (i, j) has
/// index i + nx * j. The Brownian family on the torus is the product of two
/// circle families; the heat kernel factorizes accordingly.
class TorusModel {
public:
    TorusModel(double Lx, double Ly, std::size_t nx, std::size_t ny)
        : Lx_(Lx), Ly_(Ly), nx_(nx), ny_(ny), x_axis_(Lx, nx), y_axis_(Ly, ny) {
        if (nx_ * ny_ > 4096) throw std::invalid_argument("torus grid too large");
        std::vector<std::string> labels(nx_ * ny_);
        std::vector<std::vector<double>> d(nx_ * ny_, std::vector<double>(nx_ * ny_, 0.0));
        auto wrap_dist = [](double a, double L) {
            double r = std::fmod(std::abs(a), L);
            return std::min(r, L - r);
        };
        for (std::size_t j1 = 0; j1 < ny_; ++j1) {
            for (std::size_t i1 = 0; i1 < nx_; ++i1) {
                const std::size_t a = i1 + nx_ * j1;
                labels[a] = "t" + std::to_string(i1) + "_" + std::to_string(j1);
                for (std::size_t j2 = 0; j2 < ny_; ++j2) {
                    for (std::size_t i2 = 0; i2 < nx_; ++i2) {
                        const std::size_t b = i2 + nx_ * j2;
                        const double dx = wrap_dist(x_axis_.position(i1) - x_axis_.position(i2), Lx_);
                        const double dy = wrap_dist(y_axis_.position(j1) - y_axis_.position(j2), Ly_);
                        d[a][b] = std::hypot(dx, dy);
                    }
                }
            }
        }
        space_ = make_space(FiniteMetricSpace(std::move(labels), std::move(d)));
    }

    double side_x() const { return Lx_; }
    double side_y() const { return Ly_; }
    std::size_t nodes_x() const { return nx_; }
    std::size_t nodes_y() const { return ny_; }
    std::size_t nodes() const { return nx_ * ny_; }
    const SpacePtr& space() const { return space_; }
    const CircleModel& x_axis() const { return x_axis_; }
    const CircleModel& y_axis() const { return y_axis_; }

    std::size_t index(std::size_t i, std::size_t j) const { return i + nx_ * j; }
    std::size_t x_of(std::size_t node) const { return node % nx_; }
    std::size_t y_of(std::size_t node) const { return node / nx_; }

    /// Cell area node measure (raw volume).
    double node_measure(std::size_t) const { return x_axis_.spacing() * y_axis_.spacing(); }

    /// Standard energy form: four-neighbour conductances scaled so the
    /// generator is half the flat Laplacian of the grid.
    GraphDirichletForm dirichlet_form(bool normalized = true) const {
        const double hx = x_axis_.spacing();
        const double hy = y_axis_.spacing();
        const double vol = normalized ? Lx_ * Ly_ : 1.0;
        std::vector<GraphDirichletForm::Edge> edges;
        edges.reserve(2 * nodes());
        for (std::size_t j = 0; j < ny_; ++j) {
            for (std::size_t i = 0; i < nx_; ++i) {
                edges.push_back({index(i, j), index((i + 1) % nx_, j), hy / hx / vol});
                edges.push_back({index(i, j), index(i, (j + 1) % ny_), hx / hy / vol});
            }
        }
        std::vector<double> m(nodes(), hx * hy / vol);
        return GraphDirichletForm(space_, std::move(edges), std::move(m));
    }

private:
    double Lx_, Ly_;
    std::size_t nx_, ny_;
    CircleModel x_axis_, y_axis_;
    SpacePtr space_;
};

/// Heat kernel of Brownian motion (half the flat Laplacian) on the torus:
/// the product of the two wrapped circle kernels, as a density against area.
inline double torus_heat_kernel(double t, double x1, double y1, double x2, double y2, double Lx,
                                double Ly) {
    return wrapped_heat_kernel(t, x1, x2, Lx) * wrapped_heat_kernel(t, y1, y2, Ly);
}

inline double log_torus_heat_kernel(double t, double x1, double y1, double x2, double y2,
                                    double Lx, double Ly) {
    return log_wrapped_heat_kernel(t, x1, x2, Lx) + log_wrapped_heat_kernel(t, y1, y2, Ly);
}

/// Brownian paths on the torus grid: axis-independent wrapped Gaussian
/// increments, each axis snapped to its own circle. Same determinism
/// contract as the circle samplers.
inline SampleResult sample_bm_paths(const TorusModel& model, const TimeGrid& grid,
                                    std::size_t count, std::uint64_t seed, unsigned jobs = 1) {
    if (count < 1) throw std::invalid_argument("need at least one path");
    const double sigma = std::sqrt(grid.step());
    std::vector<GridPath> raw(count);
    detail::parallel_for(count, jobs, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t r = lo; r < hi; ++r) {
            auto rng = detail::substream(seed, r);
            std::uniform_int_distribution<std::size_t> init(0, model.nodes() - 1);
            std::normal_distribution<double> incr(0.0, sigma > 0.0 ? sigma : 1.0);
            std::vector<std::uint32_t> vals(grid.points());
            std::size_t node = init(rng);
            std::size_t ix = model.x_of(node), iy = model.y_of(node);
            vals[0] = static_cast<std::uint32_t>(node);
            for (std::size_t k = 1; k < grid.points(); ++k) {
                ix = model.x_axis().snap(model.x_axis().position(ix) + incr(rng));
                iy = model.y_axis().snap(model.y_axis().position(iy) + incr(rng));
                vals[k] = static_cast<std::uint32_t>(model.index(ix, iy));
            }
            raw[r] = GridPath(grid, std::move(vals));
        }
    });
    return SampleResult{detail::empirical(model.space(), grid, raw), std::move(raw)};
}

/// Kernel domination check on the torus: the dominating function is
/// evaluated at the flat geodesic distances of all node pairs against the
/// product kernel, in logs.
inline DominationResult kernel_domination_check(const TorusModel& model,
                                                const HeatKernelBound& bound,
                                                const std::vector<double>& t_grid) {
    if (t_grid.empty()) throw std::invalid_argument("domination check needs a time grid");
    double max_exponent = -std::numeric_limits<double>::infinity();
    const FiniteMetricSpace& space = *model.space();
    for (double t : t_grid) {
        if (!(t > 0.0)) throw std::invalid_argument("domination grid times must be positive");
        // distances (and the kernel) only depend on the offset pair
        for (std::size_t node = 0; node < model.nodes(); ++node) {
            const double r = space.dist(0, node);
            const double logp = log_torus_heat_kernel(
                t, 0.0, 0.0, model.x_axis().position(model.x_of(node)),
                model.y_axis().position(model.y_of(node)), model.side_x(), model.side_y());
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
