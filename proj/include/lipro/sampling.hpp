#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include "lipro/circle_model.hpp"
#include "lipro/path_space.hpp"
#include "lipro/prokhorov.hpp"

namespace lipro {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Independent RNG substream for one sampled path: fully determined by
/// (seed, path index), so results are identical at any parallelism degree.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ (index + 1)));
}

inline void parallel_for(std::size_t count, unsigned jobs,
                         const std::function<void(std::size_t, std::size_t)>& body) {
    if (jobs <= 1 || count < 2) {
        body(0, count);
        return;
    }
    const unsigned workers = std::min<unsigned>(jobs, static_cast<unsigned>(count));
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t lo = count * w / workers;
        const std::size_t hi = count * (w + 1) / workers;
        threads.emplace_back([&body, lo, hi] { body(lo, hi); });
    }
    for (auto& t : threads) t.join();
}

inline GridPathMeasure empirical(const SpacePtr& space, const TimeGrid& grid,
                                 const std::vector<GridPath>& raw) {
    std::vector<GridPathMeasure::Atom> atoms;
    atoms.reserve(raw.size());
    const double w = 1.0 / static_cast<double>(raw.size());
    for (const auto& p : raw) atoms.push_back({p, w});
    return GridPathMeasure(space, grid, std::move(atoms));
}

}  // namespace detail

struct SampleResult {
    GridPathMeasure measure;
    std::vector<GridPath> raw;  // in sample-index order, weights 1/count each
};

/// Brownian paths on the discretized circle: initial node uniform over the
/// node measure, then per step an exact wrapped Gaussian increment with
/// variance equal to the step length, snapped to the nearest node (ties to
/// the lower index). The recorded process is the Markov chain on nodes with
/// the snapped-Gaussian step kernel.
inline SampleResult sample_bm_paths(const CircleModel& model, const TimeGrid& grid,
                                    std::size_t count, std::uint64_t seed, unsigned jobs = 1) {
    if (count < 1) throw std::invalid_argument("need at least one path");
    const std::size_t n = model.nodes();
    const double sigma = std::sqrt(grid.step());
    std::vector<GridPath> raw(count);
    detail::parallel_for(count, jobs, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t r = lo; r < hi; ++r) {
            auto rng = detail::substream(seed, r);
            std::uniform_int_distribution<std::size_t> init(0, n - 1);
            std::normal_distribution<double> incr(0.0, sigma > 0.0 ? sigma : 1.0);
            std::vector<std::uint32_t> vals(grid.points());
            std::size_t node = init(rng);
            vals[0] = static_cast<std::uint32_t>(node);
            for (std::size_t k = 1; k < grid.points(); ++k) {
                const double y = model.position(node) + incr(rng);
                node = model.snap(y);
                vals[k] = static_cast<std::uint32_t>(node);
            }
            raw[r] = GridPath(grid, std::move(vals));
        }
    });
    return SampleResult{detail::empirical(model.space(), grid, raw), std::move(raw)};
}

/// Uniformly elliptic diffusion on the weighted cycle: the continuous-time
/// random walk whose jump rates come from the conductance profile and the
/// arclength node measure, observed at the grid times. Uniform profile
/// recovers Brownian motion at walk scale.
inline SampleResult sample_elliptic_paths(const CircleModel& model, const TimeGrid& grid,
                                          std::size_t count, std::uint64_t seed,
                                          unsigned jobs = 1) {
    if (count < 1) throw std::invalid_argument("need at least one path");
    const std::size_t n = model.nodes();
    // rate of the jump j -> j+1 is w_{j,j+1} / (2 m_j); likewise leftwards.
    std::vector<double> rate_right(n), rate_left(n), rate_total(n);
    for (std::size_t j = 0; j < n; ++j) {
        rate_right[j] = model.conductance(j) / (2.0 * model.node_measure(j));
        rate_left[j] = model.conductance((j + n - 1) % n) / (2.0 * model.node_measure(j));
        rate_total[j] = rate_right[j] + rate_left[j];
    }
    std::vector<GridPath> raw(count);
    detail::parallel_for(count, jobs, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t r = lo; r < hi; ++r) {
            auto rng = detail::substream(seed, r);
            std::uniform_int_distribution<std::size_t> init(0, n - 1);
            std::uniform_real_distribution<double> u01(0.0, 1.0);
            std::exponential_distribution<double> exp1(1.0);
            std::vector<std::uint32_t> vals(grid.points());
            std::size_t node = init(rng);
            vals[0] = static_cast<std::uint32_t>(node);
            double t = 0.0;
            double next_jump = exp1(rng) / rate_total[node];
            for (std::size_t k = 1; k < grid.points(); ++k) {
                const double tk = grid.time(k);
                while (next_jump <= tk) {
                    t = next_jump;
                    const bool right = u01(rng) * rate_total[node] < rate_right[node];
                    node = right ? (node + 1) % n : (node + n - 1) % n;
                    next_jump = t + exp1(rng) / rate_total[node];
                }
                vals[k] = static_cast<std::uint32_t>(node);
            }
            raw[r] = GridPath(grid, std::move(vals));
        }
    });
    return SampleResult{detail::empirical(model.space(), grid, raw), std::move(raw)};
}

struct CoupledSampleResult {
    SampleResult first;
    SampleResult second;
    /// d_C of each sample pair after pushing the first path through the
    /// index bijection, measured in the second model's metric.
    std::vector<double> paired_dc;
};

/// Samples Brownian path pairs from the two circle models under the
/// step-wise maximal coupling of their node chains: initial nodes coincide,
/// and each step recouples the node indices with the largest possible
/// probability. Marginals are exactly the two BM node chains, so the paired
/// d_C values certify a Prokhorov upper bound between the empirical laws.
/// Requires equal node counts.
inline CoupledSampleResult sample_bm_paths_coupled(const CircleModel& model_a,
                                                   const CircleModel& model_b,
                                                   const TimeGrid& grid, std::size_t count,
                                                   std::uint64_t seed, unsigned jobs = 1) {
    if (model_a.nodes() != model_b.nodes()) {
        throw std::invalid_argument("coupled sampling needs equal node counts");
    }
    if (count < 1) throw std::invalid_argument("need at least one path");
    const std::size_t n = model_a.nodes();
    const std::vector<double> pa = model_a.step_distribution(grid.step());
    const std::vector<double> pb = model_b.step_distribution(grid.step());

    // Per current index offset o = (j_b - j_a) mod n: cumulative tables of
    // the matched mass min(a(d), b(d - o)) and both residuals.
    std::vector<std::vector<double>> cum_match(n), cum_res_a(n), cum_res_b(n);
    std::vector<double> match_mass(n);
    for (std::size_t o = 0; o < n; ++o) {
        cum_match[o].resize(n);
        cum_res_a[o].resize(n);
        cum_res_b[o].resize(n);
        double cm = 0.0, ca = 0.0, cb = 0.0;
        for (std::size_t d = 0; d < n; ++d) {
            const double m = std::min(pa[d], pb[(d + n - o) % n]);
            cm += m;
            ca += pa[d] - m;
            // residual of b indexed by b's own displacement d': matched part
            // is min(a(d' + o), b(d')).
            cb += pb[d] - std::min(pa[(d + o) % n], pb[d]);
            cum_match[o][d] = cm;
            cum_res_a[o][d] = ca;
            cum_res_b[o][d] = cb;
        }
        match_mass[o] = cm;
    }

    auto invert = [](const std::vector<double>& cum, double v) -> std::size_t {
        return static_cast<std::size_t>(
            std::lower_bound(cum.begin(), cum.end(), v) - cum.begin());
    };

    const double hop_len_b = model_b.spacing();
    std::vector<GridPath> raw_a(count), raw_b(count);
    std::vector<double> dc(count, 0.0);
    detail::parallel_for(count, jobs, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t r = lo; r < hi; ++r) {
            auto rng = detail::substream(seed, r);
            std::uniform_int_distribution<std::size_t> init(0, n - 1);
            std::uniform_real_distribution<double> u01(0.0, 1.0);
            std::vector<std::uint32_t> va(grid.points()), vb(grid.points());
            std::size_t ja = init(rng);
            std::size_t jb = ja;
            va[0] = vb[0] = static_cast<std::uint32_t>(ja);
            double worst = 0.0;
            for (std::size_t k = 1; k < grid.points(); ++k) {
                const std::size_t o = (jb + n - ja) % n;
                const double u = u01(rng);
                std::size_t da, db;
                if (u < match_mass[o]) {
                    da = std::min(invert(cum_match[o], u), n - 1);
                    db = (da + n - o) % n;
                } else {
                    const double res = 1.0 - match_mass[o];
                    const double ua = u01(rng) * res;
                    const double ub = u01(rng) * res;
                    da = std::min(invert(cum_res_a[o], ua), n - 1);
                    db = std::min(invert(cum_res_b[o], ub), n - 1);
                }
                ja = (ja + da) % n;
                jb = (jb + db) % n;
                va[k] = static_cast<std::uint32_t>(ja);
                vb[k] = static_cast<std::uint32_t>(jb);
                worst = std::max(worst,
                                 hop_len_b * static_cast<double>(model_b.hop(ja, jb)));
            }
            raw_a[r] = GridPath(grid, std::move(va));
            raw_b[r] = GridPath(grid, std::move(vb));
            dc[r] = worst;
        }
    });
    CoupledSampleResult out{
        SampleResult{detail::empirical(model_a.space(), grid, raw_a), std::move(raw_a)},
        SampleResult{detail::empirical(model_b.space(), grid, raw_b), std::move(raw_b)},
        std::move(dc)};
    return out;
}

struct ModulusEstimate {
    double estimate = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    std::size_t exceed = 0;
    std::size_t total = 0;
};

/// Fraction of sampled paths whose displacement from the window start
/// exceeds gamma somewhere in [t, t + lambda] (grid times), with a Wilson
/// 95% confidence interval.
inline ModulusEstimate empirical_modulus(const FiniteMetricSpace& space,
                                         const std::vector<GridPath>& paths, double t,
                                         double lambda, double gamma) {
    if (paths.empty()) throw std::invalid_argument("no sampled paths");
    const TimeGrid& grid = paths.front().grid;
    if (lambda < 0.0 || t < -1e-12 || t + lambda > grid.horizon + 1e-9) {
        throw std::invalid_argument("window off grid");
    }
    // locate the anchor grid index
    std::size_t k0 = grid.points();
    for (std::size_t k = 0; k < grid.points(); ++k) {
        if (std::abs(grid.time(k) - t) <= 1e-9) {
            k0 = k;
            break;
        }
    }
    if (k0 == grid.points()) throw std::invalid_argument("window off grid");
    std::size_t k1 = k0;
    while (k1 + 1 < grid.points() && grid.time(k1 + 1) <= t + lambda + 1e-9) ++k1;

    std::size_t exceed = 0;
    for (const auto& p : paths) {
        double worst = 0.0;
        for (std::size_t k = k0; k <= k1; ++k) {
            worst = std::max(worst, space.dist(p.values[k], p.values[k0]));
        }
        if (worst > gamma) ++exceed;
    }
    ModulusEstimate out;
    out.exceed = exceed;
    out.total = paths.size();
    out.estimate = static_cast<double>(exceed) / static_cast<double>(paths.size());
    out.lower = wilson_lower(exceed, paths.size());
    out.upper = wilson_upper(exceed, paths.size());
    return out;
}

/// Empirical node distribution at grid index k.
inline std::vector<double> marginal_at(const std::vector<GridPath>& paths, std::size_t nodes,
                                       std::size_t k) {
    std::vector<double> p(nodes, 0.0);
    for (const auto& path : paths) p[path.values.at(k)] += 1.0;
    for (double& v : p) v /= static_cast<double>(paths.size());
    return p;
}

inline double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return 0.5 * s;
}

}  // namespace lipro
