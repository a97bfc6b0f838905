#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "lipro/dirichlet_form.hpp"
#include "lipro/metric_map.hpp"

namespace lipro {

/// An eps-isometry used to move functions and measures between two spaces;
/// construction certifies the declared defect.
struct TransferMap {
    MetricMap f;
    double defect;

    TransferMap(MetricMap map, double declared_defect) : f(std::move(map)), defect(declared_defect) {
        if (f.size() >= 2 && isometry_defect(f) > defect + kValidationTol) {
            throw std::invalid_argument("transfer map violates its declared defect");
        }
    }
};

/// Push-forward f_* u = u o f^{-1} (a function on the target).
inline std::vector<double> push_function(const MetricMap& f, const std::vector<double>& u) {
    if (u.size() != f.size()) throw std::invalid_argument("function size does not match the map");
    std::vector<double> out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[f.apply(i)] = u[i];
    return out;
}

/// Pull-back f^* u = u o f (a function on the source).
inline std::vector<double> pull_function(const MetricMap& f, const std::vector<double>& u) {
    if (u.size() != f.size()) throw std::invalid_argument("function size does not match the map");
    std::vector<double> out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[f.apply(i)];
    return out;
}

struct VolumeCheck {
    bool ok = false;
    double max_log_ratio = 0.0;
    std::size_t worst_node = 0;  // target-space index of the largest violation
};

/// Checks e^{-n eps} <= d(f_* Vol_src)/d Vol_tgt <= e^{n eps} nodewise:
/// the pushforward of the source node measure against the target measure
/// with n the family dimension and eps the transfer defect.
inline VolumeCheck volume_comparison_check(const TransferMap& tm,
                                           const std::vector<double>& source_measure,
                                           const std::vector<double>& target_measure, int dim) {
    if (source_measure.size() != tm.f.size() || target_measure.size() != tm.f.size()) {
        throw std::invalid_argument("measure sizes do not match the map");
    }
    VolumeCheck out;
    double worst = 0.0;
    for (std::size_t i = 0; i < source_measure.size(); ++i) {
        if (!(source_measure[i] > 0.0) || !(target_measure[tm.f.apply(i)] > 0.0)) {
            throw std::invalid_argument("volume comparison needs positive node masses");
        }
        const double r = std::abs(std::log(source_measure[i] / target_measure[tm.f.apply(i)]));
        if (r > worst) {
            worst = r;
            out.worst_node = tm.f.apply(i);
        }
    }
    out.max_log_ratio = worst;
    out.ok = worst <= static_cast<double>(dim) * tm.defect + kValidationTol;
    return out;
}

/// Refinement-study transfer between a coarse form and one fixed fine
/// reference: a bijection onto a matched subset of the fine nodes. Functions
/// pull back by restriction to the subset and push forward onto it; norms
/// are taken in the fine measure restricted to the subset and renormalized.
/// Declared in outputs as "matched-subset transfer".
class MatchedSubsetTransfer {
public:
    MatchedSubsetTransfer(SpacePtr coarse, SpacePtr fine, std::vector<std::size_t> injection)
        : coarse_(std::move(coarse)), fine_(std::move(fine)), injection_(std::move(injection)) {
        if (injection_.size() != coarse_->size()) {
            throw std::invalid_argument("one fine node per coarse node required");
        }
        std::vector<bool> seen(fine_->size(), false);
        for (std::size_t v : injection_) {
            if (v >= fine_->size() || seen[v]) throw std::invalid_argument("injection is not 1-1");
            seen[v] = true;
        }
        // Defect of the bijection onto the matched subset.
        double rmax = 0.0, rmin = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < coarse_->size(); ++a) {
            for (std::size_t b = a + 1; b < coarse_->size(); ++b) {
                const double r = fine_->dist(injection_[a], injection_[b]) / coarse_->dist(a, b);
                rmax = std::max(rmax, r);
                rmin = std::min(rmin, r);
            }
        }
        defect_ = coarse_->size() >= 2
                      ? std::abs(std::log(rmax)) + std::abs(std::log(1.0 / rmin))
                      : 0.0;
    }

    /// Nested uniform circles: coarse node k matches fine node k * (N / n).
    static MatchedSubsetTransfer nested_circles(const SpacePtr& coarse, const SpacePtr& fine) {
        const std::size_t n = coarse->size();
        const std::size_t N = fine->size();
        if (N % n != 0) throw std::invalid_argument("fine resolution must be a multiple");
        std::vector<std::size_t> inj(n);
        for (std::size_t k = 0; k < n; ++k) inj[k] = k * (N / n);
        return MatchedSubsetTransfer(coarse, fine, std::move(inj));
    }

    const SpacePtr& coarse() const { return coarse_; }
    const SpacePtr& fine() const { return fine_; }
    const std::vector<std::size_t>& injection() const { return injection_; }
    double defect() const { return defect_; }
    std::size_t coarse_size() const { return coarse_->size(); }

    /// u on the fine space -> its restriction along the injection.
    std::vector<double> pull(const std::vector<double>& u_fine) const {
        if (u_fine.size() != fine_->size()) throw std::invalid_argument("size mismatch");
        std::vector<double> out(injection_.size());
        for (std::size_t k = 0; k < injection_.size(); ++k) out[k] = u_fine[injection_[k]];
        return out;
    }

    /// u on the coarse space pushes onto the matched fine nodes in injection
    /// order, i.e. the same coordinates; comparisons against fine functions
    /// restrict those through pull().

    /// L^2 norm over the matched subset: fine measure restricted to the
    /// subset and renormalized to total mass 1.
    double subset_norm(const GraphDirichletForm& fine_form,
                       const std::vector<double>& values_on_subset) const {
        if (values_on_subset.size() != injection_.size()) {
            throw std::invalid_argument("size mismatch");
        }
        double mass = 0.0;
        for (std::size_t k = 0; k < injection_.size(); ++k) {
            mass += fine_form.measure()[injection_[k]];
        }
        double s = 0.0;
        for (std::size_t k = 0; k < injection_.size(); ++k) {
            s += fine_form.measure()[injection_[k]] / mass * values_on_subset[k] *
                 values_on_subset[k];
        }
        return std::sqrt(s);
    }

private:
    SpacePtr coarse_;
    SpacePtr fine_;
    std::vector<std::size_t> injection_;
    double defect_ = 0.0;
};

}  // namespace lipro
