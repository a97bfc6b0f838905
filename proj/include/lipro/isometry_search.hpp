#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "lipro/metric_map.hpp"
#include "lipro/metric_space.hpp"

namespace lipro {

struct LipschitzResult {
    double value = std::numeric_limits<double>::infinity();
    std::optional<MetricMap> witness;
    std::string method;  // "exhaustive", "branch-and-bound" or "infinite"
};

namespace detail {

/// Defect of a full assignment, as (max ratio, min ratio) over all pairs.
inline double assignment_defect(const FiniteMetricSpace& x, const FiniteMetricSpace& y,
                                const std::vector<std::size_t>& a) {
    double rmax = 0.0, rmin = std::numeric_limits<double>::infinity();
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double r = y.dist(a[i], a[j]) / x.dist(i, j);
            rmax = std::max(rmax, r);
            rmin = std::min(rmin, r);
        }
    }
    return std::abs(std::log(rmax)) + std::abs(std::log(1.0 / rmin));
}

struct SearchBest {
    double value = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> assignment;

    void offer(double v, const std::vector<std::size_t>& a) {
        if (v < value || (v == value && (assignment.empty() || a < assignment))) {
            value = v;
            assignment = a;
        }
    }
    void merge(const SearchBest& other) {
        if (other.assignment.empty()) return;
        offer(other.value, other.assignment);
    }
};

/// Depth-first search over bijections with an admissible ratio bound: a
/// partial assignment already forces dil(f) >= rmax and dil(f^-1) >= 1/rmin,
/// hence defect >= max(0, log rmax) + max(0, -log rmin).
inline void bb_search(const FiniteMetricSpace& x, const FiniteMetricSpace& y,
                      std::vector<std::size_t>& partial, std::vector<bool>& used,
                      double rmax, double rmin, SearchBest& best) {
    const std::size_t n = x.size();
    const std::size_t k = partial.size();
    if (k == n) {
        best.offer(std::abs(std::log(rmax)) + std::abs(std::log(1.0 / rmin)), partial);
        return;
    }
    for (std::size_t cand = 0; cand < n; ++cand) {
        if (used[cand]) continue;
        double nrmax = rmax, nrmin = rmin;
        for (std::size_t j = 0; j < k; ++j) {
            const double r = y.dist(cand, partial[j]) / x.dist(k, j);
            nrmax = std::max(nrmax, r);
            nrmin = std::min(nrmin, r);
        }
        const double lb = std::max(0.0, std::log(nrmax)) + std::max(0.0, -std::log(nrmin));
        if (lb > best.value) continue;
        partial.push_back(cand);
        used[cand] = true;
        bb_search(x, y, partial, used, nrmax, nrmin, best);
        used[cand] = false;
        partial.pop_back();
    }
}

}  // namespace detail

/// Exact Lipschitz distance between two finite metric spaces: the minimum
/// isometry defect over all bijections, or infinity when the cardinalities
/// differ. Exhaustive enumeration up to `exhaustive_limit` points,
/// branch-and-bound beyond. The result is deterministic at any `jobs`:
/// ties are broken toward the lexicographically smallest assignment.
inline LipschitzResult lipschitz_distance(SpacePtr x, SpacePtr y,
                                          std::size_t exhaustive_limit = 8,
                                          unsigned jobs = 1) {
    LipschitzResult out;
    if (x->size() != y->size()) {
        out.method = "infinite";
        return out;
    }
    const std::size_t n = x->size();
    if (n == 1) {
        // A single point admits only the trivial bijection, a 0-isometry.
        out.value = 0.0;
        out.witness = MetricMap(x, y, {0});
        out.method = "exhaustive";
        return out;
    }

    const bool exhaustive = n <= exhaustive_limit;
    detail::SearchBest best;

    auto run_block = [&](std::size_t first_lo, std::size_t first_hi, detail::SearchBest& local) {
        std::vector<std::size_t> partial;
        std::vector<bool> used(n, false);
        partial.reserve(n);
        for (std::size_t first = first_lo; first < first_hi; ++first) {
            partial.push_back(first);
            used[first] = true;
            if (exhaustive) {
                // Plain enumeration; the bound degenerates to never pruning.
                std::vector<std::size_t> rest;
                for (std::size_t v = 0; v < n; ++v)
                    if (v != first) rest.push_back(v);
                do {
                    std::vector<std::size_t> a = partial;
                    a.insert(a.end(), rest.begin(), rest.end());
                    local.offer(detail::assignment_defect(*x, *y, a), a);
                } while (std::next_permutation(rest.begin(), rest.end()));
            } else {
                detail::bb_search(*x, *y, partial, used, 0.0,
                                  std::numeric_limits<double>::infinity(), local);
            }
            used[first] = false;
            partial.pop_back();
        }
    };

    if (jobs <= 1 || n < 3) {
        run_block(0, n, best);
    } else {
        const unsigned workers = std::min<unsigned>(jobs, static_cast<unsigned>(n));
        std::vector<detail::SearchBest> partials(workers);
        std::vector<std::thread> threads;
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t lo = n * w / workers;
            const std::size_t hi = n * (w + 1) / workers;
            threads.emplace_back([&, lo, hi, w] { run_block(lo, hi, partials[w]); });
        }
        for (auto& t : threads) t.join();
        for (const auto& p : partials) best.merge(p);
    }

    out.value = best.value;
    out.witness = MetricMap(x, y, best.assignment);
    out.method = exhaustive ? "exhaustive" : "branch-and-bound";
    return out;
}

/// All distance-matrix automorphisms of X (defect exactly 0), found by
/// backtracking with exact distance-equality pruning. Results are sorted by
/// assignment, starting with the identity.
inline std::vector<MetricMap> self_isometries(SpacePtr x) {
    const std::size_t n = x->size();
    std::vector<std::vector<std::size_t>> found;
    std::vector<std::size_t> partial;
    std::vector<bool> used(n, false);
    partial.reserve(n);

    // Candidate pre-filter: a point can only map to one with the same
    // multiset of distances to all points.
    std::vector<std::vector<double>> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        rows[i].resize(n);
        for (std::size_t j = 0; j < n; ++j) rows[i][j] = x->dist(i, j);
        std::sort(rows[i].begin(), rows[i].end());
    }

    std::function<void()> rec = [&]() {
        const std::size_t k = partial.size();
        if (k == n) {
            found.push_back(partial);
            return;
        }
        for (std::size_t cand = 0; cand < n; ++cand) {
            if (used[cand] || rows[cand] != rows[k]) continue;
            bool ok = true;
            for (std::size_t j = 0; j < k && ok; ++j) {
                ok = x->dist(cand, partial[j]) == x->dist(k, j);
            }
            if (!ok) continue;
            partial.push_back(cand);
            used[cand] = true;
            rec();
            used[cand] = false;
            partial.pop_back();
        }
    };
    rec();

    std::vector<MetricMap> maps;
    maps.reserve(found.size());
    for (auto& a : found) maps.emplace_back(x, x, std::move(a));
    return maps;
}

}  // namespace lipro
