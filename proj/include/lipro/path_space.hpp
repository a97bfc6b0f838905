#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include "lipro/metric_map.hpp"
#include "lipro/metric_space.hpp"

namespace lipro {

/// Uniform observation grid on [0, T]: t_k = k T / m for k = 0..m.
/// The degenerate grid m = 0 observes only t = 0.
struct TimeGrid {
    double horizon = 1.0;     // T
    std::size_t steps = 1;    // m

    TimeGrid() = default;
    TimeGrid(double T, std::size_t m) : horizon(T), steps(m) {
        if (!(horizon > 0.0)) throw std::invalid_argument("time horizon must be positive");
    }

    std::size_t points() const { return steps + 1; }
    double time(std::size_t k) const {
        return steps == 0 ? 0.0 : horizon * static_cast<double>(k) / static_cast<double>(steps);
    }
    double step() const { return steps == 0 ? 0.0 : horizon / static_cast<double>(steps); }

    bool operator==(const TimeGrid& o) const {
        return horizon == o.horizon && steps == o.steps;
    }
    bool operator!=(const TimeGrid& o) const { return !(*this == o); }
};

/// A grid-time path: one point index per observation time.
struct GridPath {
    TimeGrid grid;
    std::vector<std::uint32_t> values;  // length grid.points()

    GridPath() = default;
    GridPath(TimeGrid g, std::vector<std::uint32_t> v) : grid(g), values(std::move(v)) {
        if (values.size() != grid.points()) {
            throw std::invalid_argument("path length does not match grid");
        }
    }

    bool operator==(const GridPath& o) const { return grid == o.grid && values == o.values; }
};

/// sup_t d(v(t), w(t)) over the shared grid. Grids with different horizons
/// are rejected rather than rescaled.
inline double uniform_metric(const FiniteMetricSpace& space, const GridPath& v, const GridPath& w) {
    if (v.grid != w.grid) throw std::invalid_argument("uniform metric needs a shared grid");
    double d = 0.0;
    for (std::size_t k = 0; k < v.values.size(); ++k) {
        d = std::max(d, space.dist(v.values[k], w.values[k]));
    }
    return d;
}

inline GridPath constant_path(std::uint32_t x, const TimeGrid& grid) {
    return GridPath(grid, std::vector<std::uint32_t>(grid.points(), x));
}

/// Phi_f(v)(t) = f(v(t)).
inline GridPath pushforward_path(const MetricMap& f, const GridPath& v) {
    std::vector<std::uint32_t> out(v.values.size());
    for (std::size_t k = 0; k < v.values.size(); ++k) {
        out[k] = static_cast<std::uint32_t>(f.apply(v.values[k]));
    }
    return GridPath(v.grid, std::move(out));
}

/// min over S of the uniform metric; the closed enlargement S^a is
/// { v : set_distance(v, S) <= a }.
inline double set_distance(const FiniteMetricSpace& space, const GridPath& v,
                           const std::vector<GridPath>& S) {
    if (S.empty()) throw std::invalid_argument("set distance needs a nonempty set");
    double d = std::numeric_limits<double>::infinity();
    for (const GridPath& w : S) d = std::min(d, uniform_metric(space, v, w));
    return d;
}

/// A finitely supported probability measure on grid-time paths. Atoms are
/// merged on exact path equality, sorted lexicographically, and must carry
/// positive weights summing to 1 within kValidationTol.
class GridPathMeasure {
public:
    struct Atom {
        GridPath path;
        double weight;
    };

    GridPathMeasure(SpacePtr ambient, TimeGrid grid, std::vector<Atom> atoms)
        : ambient_(std::move(ambient)), grid_(grid) {
        if (!ambient_) throw std::invalid_argument("measure needs an ambient space");
        if (atoms.empty()) throw std::invalid_argument("measure needs at least one atom");
        std::map<std::vector<std::uint32_t>, double> merged;
        // compensated summation: the 1e-12 mass tolerance must stay
        // meaningful for empirical measures with 1e5 atoms
        double total = 0.0, comp = 0.0;
        for (auto& a : atoms) {
            if (a.path.grid != grid_) throw std::invalid_argument("all atoms must share the grid");
            for (std::uint32_t v : a.path.values) {
                if (v >= ambient_->size()) throw std::invalid_argument("path index out of range");
            }
            if (!(a.weight > 0.0)) throw std::invalid_argument("atom weights must be positive");
            merged[a.path.values] += a.weight;
            const double y = a.weight - comp;
            const double t = total + y;
            comp = (t - total) - y;
            total = t;
        }
        if (std::abs(total - 1.0) > kValidationTol) {
            throw std::invalid_argument("atom weights must sum to 1");
        }
        atoms_.reserve(merged.size());
        for (auto& [values, w] : merged) {
            atoms_.push_back({GridPath(grid_, values), w});
        }
    }

    const SpacePtr& ambient() const { return ambient_; }
    const TimeGrid& grid() const { return grid_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    std::size_t support_size() const { return atoms_.size(); }

    static GridPathMeasure dirac(SpacePtr ambient, GridPath path) {
        TimeGrid g = path.grid;
        return GridPathMeasure(std::move(ambient), g, {{std::move(path), 1.0}});
    }

    /// Equality as merged atom sets with exactly equal weights.
    bool operator==(const GridPathMeasure& o) const {
        if (*ambient_ != *o.ambient_ || grid_ != o.grid_ || atoms_.size() != o.atoms_.size())
            return false;
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            if (!(atoms_[i].path == o.atoms_[i].path) || atoms_[i].weight != o.atoms_[i].weight)
                return false;
        }
        return true;
    }

private:
    SpacePtr ambient_;
    TimeGrid grid_;
    std::vector<Atom> atoms_;  // merged, sorted by path values
};

/// Push-forward measure Phi_f_* P: map every atom path through f, keep the
/// weights, merge atoms that land on the same path.
inline GridPathMeasure pushforward_measure(const MetricMap& f, const GridPathMeasure& P) {
    if (*P.ambient() != *f.source()) {
        throw std::invalid_argument("measure does not live on the map's source");
    }
    std::vector<GridPathMeasure::Atom> atoms;
    atoms.reserve(P.atoms().size());
    for (const auto& a : P.atoms()) {
        atoms.push_back({pushforward_path(f, a.path), a.weight});
    }
    return GridPathMeasure(f.target(), P.grid(), std::move(atoms));
}

/// All |X|^(m+1) grid paths, in lexicographic order. Guarded by a size cap.
inline std::vector<GridPath> enumerate_paths(const FiniteMetricSpace& space, const TimeGrid& grid,
                                             std::size_t cap = 200000) {
    const std::size_t n = space.size();
    const std::size_t len = grid.points();
    double count = 1.0;
    for (std::size_t k = 0; k < len; ++k) count *= static_cast<double>(n);
    if (count > static_cast<double>(cap)) {
        throw std::invalid_argument("path space too large to enumerate");
    }
    std::vector<GridPath> out;
    out.reserve(static_cast<std::size_t>(count));
    std::vector<std::uint32_t> cur(len, 0);
    for (;;) {
        out.emplace_back(grid, cur);
        std::size_t k = len;
        while (k > 0) {
            if (++cur[k - 1] < n) break;
            cur[k - 1] = 0;
            --k;
        }
        if (k == 0) break;
    }
    return out;
}

}  // namespace lipro
