#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "lipro/dirichlet_form.hpp"
#include "lipro/transfer.hpp"

namespace lipro {

/// One stage of a refinement study: a coarse form plus its transfer onto
/// the common fine reference.
struct MoscoStage {
    const GraphDirichletForm* form = nullptr;
    const MatchedSubsetTransfer* transfer = nullptr;
};

struct MoscoResolventRow {
    std::size_t index = 0;
    std::size_t resolution = 0;
    double defect = 0.0;
    std::vector<double> errors;  // one per test function
};

struct MoscoResolventResult {
    std::vector<MoscoResolventRow> rows;
    std::vector<double> slopes;  // per test function: fit of log error vs log resolution
};

/// Resolvent-convergence surrogate of Mosco convergence: per stage i and
/// test function u on the limit space,
///   || G_i(alpha) (pull u) - pull(G(alpha) u) ||
/// in the matched-subset L^2 norm of the limit form.
inline MoscoResolventResult mosco_resolvent_test(const std::vector<MoscoStage>& stages,
                                                 const GraphDirichletForm& limit, double alpha,
                                                 const std::vector<std::vector<double>>& test_functions) {
    if (!(alpha > 0.0)) throw std::invalid_argument("resolvent test needs alpha > 0");
    MoscoResolventResult out;
    std::vector<std::vector<double>> limit_resolvents;
    limit_resolvents.reserve(test_functions.size());
    for (const auto& u : test_functions) limit_resolvents.push_back(limit.resolvent_apply(alpha, u));

    for (std::size_t i = 0; i < stages.size(); ++i) {
        const auto& stage = stages[i];
        if (*stage.transfer->fine() != *limit.space()) {
            throw std::invalid_argument("stage transfer does not target the limit space");
        }
        MoscoResolventRow row;
        row.index = i;
        row.resolution = stage.form->size();
        row.defect = stage.transfer->defect();
        for (std::size_t t = 0; t < test_functions.size(); ++t) {
            const std::vector<double> coarse =
                stage.form->resolvent_apply(alpha, stage.transfer->pull(test_functions[t]));
            const std::vector<double> reference = stage.transfer->pull(limit_resolvents[t]);
            std::vector<double> diff(coarse.size());
            for (std::size_t k = 0; k < coarse.size(); ++k) diff[k] = coarse[k] - reference[k];
            row.errors.push_back(stage.transfer->subset_norm(limit, diff));
        }
        out.rows.push_back(std::move(row));
    }

    // least-squares slope of log error against log resolution, per function
    for (std::size_t t = 0; t < test_functions.size(); ++t) {
        double n = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        for (const auto& row : out.rows) {
            if (row.errors[t] <= 0.0) continue;
            const double x = std::log(static_cast<double>(row.resolution));
            const double y = std::log(row.errors[t]);
            n += 1.0; sx += x; sy += y; sxx += x * x; sxy += x * y;
        }
        const double denom = n * sxx - sx * sx;
        out.slopes.push_back(denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0);
    }
    return out;
}

struct LiminfRow {
    std::size_t index = 0;
    double pushed_l2_gap = 0.0;  // || u_i - pull(u) || in the subset norm
    double energy = 0.0;         // E_i(u_i)
    double margin = 0.0;         // E_i(u_i) - E(u)
};

struct LiminfReport {
    std::vector<LiminfRow> rows;
    double limit_energy = 0.0;
    double min_tail_margin = 0.0;  // min over the second half of the sequence
    bool ok = false;               // min tail margin >= -1e-6
};

/// Checks the energy-liminf inequality along a declared family: the pushed
/// functions must approach u within the tolerance schedule tol_i (the
/// precondition is refused otherwise with the failing index), and the tail
/// of E_i(u_i) must not undercut E(u) beyond 1e-6.
inline LiminfReport mosco_liminf_check(const std::vector<MoscoStage>& stages,
                                       const GraphDirichletForm& limit,
                                       const std::vector<std::vector<double>>& u_sequence,
                                       const std::vector<double>& u,
                                       const std::vector<double>& tol_schedule) {
    if (stages.size() != u_sequence.size() || stages.size() != tol_schedule.size()) {
        throw std::invalid_argument("need one function and one tolerance per stage");
    }
    LiminfReport rep;
    rep.limit_energy = limit.energy(u);
    for (std::size_t i = 0; i < stages.size(); ++i) {
        const auto& stage = stages[i];
        LiminfRow row;
        row.index = i;
        const std::vector<double> pulled = stage.transfer->pull(u);
        std::vector<double> diff(pulled.size());
        for (std::size_t k = 0; k < pulled.size(); ++k) diff[k] = u_sequence[i][k] - pulled[k];
        row.pushed_l2_gap = stage.transfer->subset_norm(limit, diff);
        if (row.pushed_l2_gap > tol_schedule[i]) {
            throw std::invalid_argument(
                "liminf precondition fails at stage " + std::to_string(i) + ": pushed gap " +
                std::to_string(row.pushed_l2_gap) + " exceeds the declared tolerance " +
                std::to_string(tol_schedule[i]));
        }
        row.energy = stage.form->energy(u_sequence[i]);
        row.margin = row.energy - rep.limit_energy;
        rep.rows.push_back(row);
    }
    rep.min_tail_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = rep.rows.size() / 2; i < rep.rows.size(); ++i) {
        rep.min_tail_margin = std::min(rep.min_tail_margin, rep.rows[i].margin);
    }
    rep.ok = rep.min_tail_margin >= -1e-6;
    return rep;
}

struct RecoveryReport {
    std::vector<std::vector<double>> recovery;  // u_i = pull(u) per stage
    std::vector<double> energy_gap;             // |E_i(u_i) - E(u)|
    double final_gap = 0.0;
};

/// The recovery sequence of the energy-limsup condition: pull the limit
/// function back along each transfer and report the energy gaps.
inline RecoveryReport recovery_sequence(const GraphDirichletForm& limit,
                                        const std::vector<MoscoStage>& stages,
                                        const std::vector<double>& u) {
    RecoveryReport rep;
    const double eu = limit.energy(u);
    for (const auto& stage : stages) {
        std::vector<double> ui = stage.transfer->pull(u);
        rep.energy_gap.push_back(std::abs(stage.form->energy(ui) - eu));
        rep.recovery.push_back(std::move(ui));
    }
    rep.final_gap = rep.energy_gap.empty() ? 0.0 : rep.energy_gap.back();
    return rep;
}

/// E[g_1(X_{t_1}) ... g_k(X_{t_k})] through the backward semigroup
/// recursion h^k = g_k, h^{j-1} = g_{j-1} . T(t_j - t_{j-1}) h^j, integrated
/// against the initial density after one more semigroup step.
inline double fdd_recursion(const GraphDirichletForm& form, const InitialDensity& density,
                            const std::vector<double>& times,
                            const std::vector<std::vector<double>>& observables) {
    if (times.size() != observables.size()) {
        throw std::invalid_argument("one observable per time required");
    }
    if (times.empty()) throw std::invalid_argument("need at least one time");
    for (std::size_t j = 0; j < times.size(); ++j) {
        if (times[j] < 0.0) throw std::invalid_argument("times must be nonnegative");
        if (j > 0 && times[j] <= times[j - 1]) {
            throw std::invalid_argument("times must be strictly increasing");
        }
    }
    density.validate(form);

    std::vector<double> h = observables.back();
    for (std::size_t j = observables.size(); j-- > 1;) {
        const std::vector<double> smoothed = form.semigroup_apply(times[j] - times[j - 1], h);
        h.resize(smoothed.size());
        for (std::size_t k = 0; k < h.size(); ++k) h[k] = observables[j - 1][k] * smoothed[k];
    }
    const std::vector<double> start = form.semigroup_apply(times.front(), h);
    return form.inner(density.values, start);
}

struct FddRow {
    std::size_t index = 0;
    std::size_t resolution = 0;
    double value = 0.0;
    double error = 0.0;        // |fdd_i - fdd_limit|
    double density_gap = 0.0;  // pushed-density L^2 distance to the limit density
};

struct FddConvergenceResult {
    double limit_value = 0.0;
    std::vector<FddRow> rows;
};

/// Finite-dimensional distribution errors along a refinement family: stage
/// fdd values with pulled observables and densities against the limit value,
/// plus the pushed-density convergence norm.
inline FddConvergenceResult fdd_convergence_test(const std::vector<MoscoStage>& stages,
                                                 const GraphDirichletForm& limit,
                                                 const std::vector<InitialDensity>& densities,
                                                 const InitialDensity& limit_density,
                                                 const std::vector<double>& times,
                                                 const std::vector<std::vector<double>>& observables) {
    if (stages.size() != densities.size()) {
        throw std::invalid_argument("one density per stage required");
    }
    FddConvergenceResult out;
    out.limit_value = fdd_recursion(limit, limit_density, times, observables);
    for (std::size_t i = 0; i < stages.size(); ++i) {
        const auto& stage = stages[i];
        std::vector<std::vector<double>> pulled;
        pulled.reserve(observables.size());
        for (const auto& g : observables) pulled.push_back(stage.transfer->pull(g));
        FddRow row;
        row.index = i;
        row.resolution = stage.form->size();
        row.value = fdd_recursion(*stage.form, densities[i], times, pulled);
        row.error = std::abs(row.value - out.limit_value);
        // density of the pushed initial measure against the subset-restricted
        // limit measure, compared with the limit density on matched nodes
        const auto& inj = stage.transfer->injection();
        double subset_mass = 0.0;
        for (std::size_t k = 0; k < inj.size(); ++k) subset_mass += limit.measure()[inj[k]];
        std::vector<double> gap(inj.size());
        for (std::size_t k = 0; k < inj.size(); ++k) {
            const double pushed_density = densities[i].values[k] * stage.form->measure()[k] /
                                          (limit.measure()[inj[k]] / subset_mass);
            gap[k] = pushed_density - limit_density.values[inj[k]];
        }
        row.density_gap = stage.transfer->subset_norm(limit, gap);
        out.rows.push_back(std::move(row));
    }
    return out;
}

}  // namespace lipro
