#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "lipro/metric_map.hpp"
#include "lipro/metric_space.hpp"

namespace lipro {

/// A finite Cauchy chain of spaces: links f_{i,i+1} between consecutive
/// spaces together with declared per-link defect bounds.
struct CauchyInput {
    std::vector<SpacePtr> spaces;
    std::vector<MetricMap> links;     // links[i]: spaces[i] -> spaces[i+1]
    std::vector<double> defects;      // declared bound on isometry_defect(links[i])
};

struct CauchyLimitResult {
    SpacePtr limit;                   // points carry the first space's labels
    std::vector<MetricMap> to_limit;  // f_i: spaces[i] -> limit, f_j o ~f_ij = f_i exactly
    std::vector<double> eps;          // eps[i] = sum of declared defects from link i on
    std::size_t truncation_index = 0; // the chain is truncated at the last space
};

/// Finite truncation of the completeness construction: compose the links,
/// pull the last space's distance matrix back to the first space's point
/// indexing, and report per-stage tail defect sums. Only finitely many links
/// are supplied, so the returned matrix is the last term of the limit
/// sequence; eps[i] bounds how far stage i can still move.
inline CauchyLimitResult cauchy_limit(const CauchyInput& input) {
    const std::size_t k = input.spaces.size();
    if (k == 0) throw std::invalid_argument("empty chain");
    if (input.links.size() + 1 != k || input.defects.size() != input.links.size()) {
        throw std::invalid_argument("need exactly one link and one defect per consecutive pair");
    }
    const std::size_t n = input.spaces.front()->size();
    for (const auto& s : input.spaces) {
        if (s->size() != n) throw std::invalid_argument("all chain spaces must share one cardinality");
    }
    for (std::size_t i = 0; i + 1 < k; ++i) {
        const MetricMap& f = input.links[i];
        if (*f.source() != *input.spaces[i] || *f.target() != *input.spaces[i + 1]) {
            throw std::invalid_argument("link " + std::to_string(i) + " does not compose with the chain");
        }
        if (n >= 2 && isometry_defect(f) > input.defects[i] + kValidationTol) {
            throw std::invalid_argument("link " + std::to_string(i) +
                                        " violates its declared defect bound");
        }
    }

    // Composite maps ~f_{i,k-1}: spaces[i] -> spaces[k-1], built back to front.
    std::vector<MetricMap> tail_maps;
    tail_maps.reserve(k);
    tail_maps.push_back(MetricMap::identity(input.spaces.back()));
    for (std::size_t i = k - 1; i-- > 0;) {
        tail_maps.push_back(MetricMap::compose(tail_maps.back(), input.links[i]));
    }
    std::reverse(tail_maps.begin(), tail_maps.end());  // tail_maps[i]: spaces[i] -> spaces[k-1]

    // Limit matrix r(alpha, beta) = d_{k-1}(~f(alpha), ~f(beta)) under the
    // first space's labelling.
    const MetricMap& head = tail_maps.front();
    const FiniteMetricSpace& last = *input.spaces.back();
    std::vector<std::vector<double>> r(n, std::vector<double>(n, 0.0));
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            r[a][b] = last.dist(head.apply(a), head.apply(b));
        }
    }
    CauchyLimitResult out;
    out.limit = make_space(FiniteMetricSpace(input.spaces.front()->labels(), std::move(r)));
    out.truncation_index = k - 1;

    // relabel: spaces[k-1] -> limit, the inverse indexing of head.
    std::vector<std::size_t> relabel(n);
    for (std::size_t a = 0; a < n; ++a) relabel[head.apply(a)] = a;
    const MetricMap to_limit_last(input.spaces.back(), out.limit, relabel);

    out.to_limit.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        out.to_limit.push_back(MetricMap::compose(to_limit_last, tail_maps[i]));
    }
    out.eps.assign(k, 0.0);
    for (std::size_t i = k - 1; i-- > 0;) {
        out.eps[i] = out.eps[i + 1] + input.defects[i];
    }
    return out;
}

}  // namespace lipro
