#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "lipro/maxflow.hpp"
#include "lipro/metric_map.hpp"
#include "lipro/path_space.hpp"

namespace lipro {

/// A partial coupling between the atoms of P (rows) and Q (columns):
/// row sums never exceed the P weights, column sums never exceed the Q
/// weights. Witnesses d_P <= delta when all its mass sits on pairs with
/// d_C <= delta and the total mass is >= 1 - delta.
struct Coupling {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> mass;  // row-major rows*cols
    double total = 0.0;

    double operator()(std::size_t r, std::size_t c) const { return mass[r * cols + c]; }
};

struct ProkhorovResult {
    double value = 0.0;
    Coupling witness;
};

namespace detail {

inline std::vector<double> pairwise_dc(const GridPathMeasure& P, const GridPathMeasure& Q) {
    const auto& pa = P.atoms();
    const auto& qa = Q.atoms();
    std::vector<double> d(pa.size() * qa.size());
    for (std::size_t r = 0; r < pa.size(); ++r) {
        for (std::size_t c = 0; c < qa.size(); ++c) {
            d[r * qa.size() + c] = uniform_metric(*P.ambient(), pa[r].path, qa[c].path);
        }
    }
    return d;
}

inline void require_comparable(const GridPathMeasure& P, const GridPathMeasure& Q) {
    if (*P.ambient() != *Q.ambient()) {
        throw std::invalid_argument("Prokhorov distance needs a shared ambient space");
    }
    if (P.grid() != Q.grid()) {
        throw std::invalid_argument("Prokhorov distance needs a shared time grid");
    }
}

}  // namespace detail

/// Prokhorov distance between two finitely supported path measures, with a
/// witness coupling. Strassen on a finite support: d_P is the least delta
/// such that some coupling puts mass >= 1 - delta on pairs with d_C <= delta
/// (closed thresholds). The scan walks the sorted candidate radii, growing
/// one max-flow incrementally; flow arithmetic is exact, so the witness
/// certifies the value without tolerance.
inline ProkhorovResult prokhorov_distance(const GridPathMeasure& P, const GridPathMeasure& Q) {
    detail::require_comparable(P, Q);
    const auto& pa = P.atoms();
    const auto& qa = Q.atoms();
    const std::size_t R = pa.size();
    const std::size_t C = qa.size();
    const std::vector<double> dc = detail::pairwise_dc(P, Q);

    // Candidate radii: 0 plus the distinct pairwise d_C values.
    std::vector<double> candidates(dc);
    candidates.push_back(0.0);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    // Pairs sorted by distance for incremental edge insertion.
    std::vector<std::size_t> order(dc.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return dc[a] < dc[b] || (dc[a] == dc[b] && a < b); });

    // Network: source = 0, rows 1..R, cols R+1..R+C, sink = R+C+1.
    const std::size_t source = 0, sink = R + C + 1;
    MaxFlow flow(R + C + 2);
    for (std::size_t r = 0; r < R; ++r) flow.add_edge(source, 1 + r, Rational(pa[r].weight));
    for (std::size_t c = 0; c < C; ++c) flow.add_edge(1 + R + c, sink, Rational(qa[c].weight));

    std::vector<std::size_t> pair_edge_id(dc.size(), 0);
    std::vector<bool> pair_present(dc.size(), false);

    double best_value = std::numeric_limits<double>::infinity();
    std::vector<std::pair<std::size_t, Rational>> best_flows;  // (pair index, mass)

    std::size_t next_pair = 0;
    for (double radius : candidates) {
        while (next_pair < order.size() && dc[order[next_pair]] <= radius) {
            const std::size_t p = order[next_pair];
            pair_edge_id[p] = flow.add_edge(1 + p / C, 1 + R + p % C, Rational(2));
            pair_present[p] = true;
            ++next_pair;
        }
        const Rational mass = flow.run(source, sink);
        const double shortfall = static_cast<double>(Rational(1) - mass);
        const double value = std::max(radius, shortfall);
        if (value < best_value) {
            best_value = value;
            best_flows.clear();
            for (std::size_t p = 0; p < dc.size(); ++p) {
                if (pair_present[p]) best_flows.emplace_back(p, flow.flow_on(pair_edge_id[p]));
            }
        }
    }

    ProkhorovResult out;
    out.value = best_value;
    out.witness.rows = R;
    out.witness.cols = C;
    out.witness.mass.assign(R * C, 0.0);
    Rational total = 0;
    for (const auto& [p, m] : best_flows) {
        out.witness.mass[p] = static_cast<double>(m);
        total += m;
    }
    out.witness.total = static_cast<double>(total);
    return out;
}

/// Ground-truth subset enumeration of the defining inequalities
///   P(A) <= Q(A^delta) + delta  and  Q(A) <= P(A^delta) + delta.
/// On each bracket between consecutive candidate radii the worst subset gap
/// is constant, so the least feasible delta is max(radius, gap) minimized
/// over brackets. Capped at 12 combined support atoms.
inline double prokhorov_bruteforce(const GridPathMeasure& P, const GridPathMeasure& Q) {
    detail::require_comparable(P, Q);

    // Union support with per-measure weights.
    std::vector<const GridPath*> support;
    std::vector<double> pw, qw;
    for (const auto& a : P.atoms()) {
        support.push_back(&a.path);
        pw.push_back(a.weight);
        qw.push_back(0.0);
    }
    for (const auto& b : Q.atoms()) {
        bool found = false;
        for (std::size_t i = 0; i < P.atoms().size() && !found; ++i) {
            if (*support[i] == b.path) {
                qw[i] = b.weight;
                found = true;
            }
        }
        if (!found) {
            support.push_back(&b.path);
            pw.push_back(0.0);
            qw.push_back(b.weight);
        }
    }
    const std::size_t n = support.size();
    if (n > 12) throw std::invalid_argument("combined support too large for subset enumeration");

    std::vector<double> d(n * n, 0.0);
    std::vector<double> candidates{0.0};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            d[i * n + j] = d[j * n + i] = uniform_metric(*P.ambient(), *support[i], *support[j]);
            candidates.push_back(d[i * n + j]);
        }
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    double best = std::numeric_limits<double>::infinity();
    for (double radius : candidates) {
        // neighbor[i] = atoms within the closed radius of atom i.
        std::vector<std::uint32_t> neighbor(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (d[i * n + j] <= radius) neighbor[i] |= (1u << j);
            }
        }
        double gap = 0.0;
        for (std::uint32_t A = 0; A < (1u << n); ++A) {
            std::uint32_t enlarged = 0;
            double pA = 0.0, qA = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (A & (1u << i)) {
                    enlarged |= neighbor[i];
                    pA += pw[i];
                    qA += qw[i];
                }
            }
            double pE = 0.0, qE = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (enlarged & (1u << i)) {
                    pE += pw[i];
                    qE += qw[i];
                }
            }
            gap = std::max(gap, std::max(pA - qE, qA - pE));
        }
        best = std::min(best, std::max(radius, gap));
    }
    return best;
}

/// Result of the modified four-inequality check of an (eps, delta)-isomorphism.
struct InequalityCheck {
    bool ok = false;
    // "": none; "forward": d_P(Phi_f P, Q) too large; "backward": d_P(Phi_f^-1 Q, P).
    std::string violated;
    double excess = 0.0;  // amount above delta * e^eps for the violated side
    double dp_forward = 0.0;
    double dp_backward = 0.0;
};

/// Checks d_P(Phi_f_* P, Q) <= delta e^eps and d_P(Phi_{f^-1}_* Q, P) <= delta e^eps,
/// which on finite supports is the four displayed inequalities under the
/// closed-enlargement convention. The defect of f is not checked here.
inline InequalityCheck modified_inequality_check(const GridPathMeasure& P, const GridPathMeasure& Q,
                                                 const MetricMap& f, double eps, double delta) {
    if (*P.ambient() != *f.source() || *Q.ambient() != *f.target()) {
        throw std::invalid_argument("measures do not match the map's spaces");
    }
    InequalityCheck out;
    const double level = delta * std::exp(eps);
    out.dp_forward = prokhorov_distance(pushforward_measure(f, P), Q).value;
    out.dp_backward = prokhorov_distance(pushforward_measure(f.inverse(), Q), P).value;
    constexpr double slack = 1e-12;
    if (out.dp_forward > level + slack) {
        out.violated = "forward";
        out.excess = out.dp_forward - level;
        return out;
    }
    if (out.dp_backward > level + slack) {
        out.violated = "backward";
        out.excess = out.dp_backward - level;
        return out;
    }
    out.ok = true;
    return out;
}

/// One-sided Wilson score interval bounds at confidence z for k successes
/// out of n trials.
inline double wilson_upper(std::size_t k, std::size_t n, double z = 1.959963984540054) {
    if (n == 0) return 1.0;
    const double p = static_cast<double>(k) / static_cast<double>(n);
    const double z2 = z * z;
    const double nn = static_cast<double>(n);
    const double denom = 1.0 + z2 / nn;
    const double center = p + z2 / (2.0 * nn);
    const double spread = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
    return std::min(1.0, (center + spread) / denom);
}

inline double wilson_lower(std::size_t k, std::size_t n, double z = 1.959963984540054) {
    if (n == 0) return 0.0;
    const double p = static_cast<double>(k) / static_cast<double>(n);
    const double z2 = z * z;
    const double nn = static_cast<double>(n);
    const double denom = 1.0 + z2 / nn;
    const double center = p + z2 / (2.0 * nn);
    const double spread = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
    return std::max(0.0, (center - spread) / denom);
}

/// Certified Prokhorov upper bound from paired samples: given per-pair d_C
/// values of any coupling of two empirical measures, returns the least delta
/// with frac(d_C > delta) <= delta. With z > 0 the exceedance fractions are
/// replaced by their Wilson upper confidence bounds, giving a statistical
/// upper bound for the underlying laws.
inline double coupled_prokhorov_bound(std::vector<double> paired_dc, double z = 0.0) {
    if (paired_dc.empty()) throw std::invalid_argument("no paired samples");
    std::sort(paired_dc.begin(), paired_dc.end());
    const std::size_t n = paired_dc.size();
    double best = std::numeric_limits<double>::infinity();
    // Candidates: 0 and each distinct sample value; exceedance counts come
    // from the sorted suffix.
    std::vector<double> candidates{0.0};
    candidates.insert(candidates.end(), paired_dc.begin(), paired_dc.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    for (double delta : candidates) {
        const auto it = std::upper_bound(paired_dc.begin(), paired_dc.end(), delta);
        const std::size_t exceed = static_cast<std::size_t>(paired_dc.end() - it);
        const double frac = z > 0.0 ? wilson_upper(exceed, n, z)
                                    : static_cast<double>(exceed) / static_cast<double>(n);
        best = std::min(best, std::max(delta, frac));
    }
    return best;
}

}  // namespace lipro
