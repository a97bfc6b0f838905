#pragma once

#include <cmath>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lipro/circle_model.hpp"
#include "lipro/metric_space.hpp"

namespace lipro {

/// Symmetric graph Dirichlet form (E, F) on a finite metric space:
/// E(u) = 1/2 sum_edges w_xy (u_x - u_y)^2 over a positive node measure m,
/// with generator (A u)_x = 1/(2 m_x) sum_y w_xy (u_x - u_y), so that
/// E(u) = <A u, u>_m. Semigroup and resolvent come from one dense
/// eigendecomposition of the m-symmetrized generator, computed once per
/// form behind a mutex (single factorization, many concurrent solves).
class GraphDirichletForm {
public:
    struct Edge {
        std::size_t i, j;
        double weight;
    };

    static constexpr std::size_t kMaxSpectralNodes = 2048;

    GraphDirichletForm(SpacePtr space, std::vector<Edge> edges, std::vector<double> node_measure)
        : space_(std::move(space)), edges_(std::move(edges)), measure_(std::move(node_measure)),
          cache_(std::make_shared<SpectralCache>()) {
        const std::size_t n = space_->size();
        if (measure_.size() != n) throw std::invalid_argument("one measure weight per node required");
        for (double m : measure_) {
            if (!(m > 0.0)) throw std::invalid_argument("node measure must be positive");
        }
        for (const auto& e : edges_) {
            if (e.i >= n || e.j >= n || e.i == e.j) throw std::invalid_argument("bad edge");
            if (!(e.weight >= 0.0)) throw std::invalid_argument("conductances must be nonnegative");
        }
    }

    const SpacePtr& space() const { return space_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<double>& measure() const { return measure_; }
    std::size_t size() const { return space_->size(); }

    double total_mass() const {
        double s = 0.0;
        for (double m : measure_) s += m;
        return s;
    }

    /// L^2(m) inner product.
    double inner(const std::vector<double>& u, const std::vector<double>& v) const {
        check_size(u);
        check_size(v);
        double s = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) s += measure_[i] * u[i] * v[i];
        return s;
    }
    double norm(const std::vector<double>& u) const { return std::sqrt(inner(u, u)); }

    /// E(u) = 1/2 sum_edges w (u_i - u_j)^2.
    double energy(const std::vector<double>& u) const {
        check_size(u);
        double s = 0.0;
        for (const auto& e : edges_) {
            const double d = u[e.i] - u[e.j];
            s += 0.5 * e.weight * d * d;
        }
        return s;
    }

    std::vector<double> apply_generator(const std::vector<double>& u) const {
        check_size(u);
        std::vector<double> out(u.size(), 0.0);
        for (const auto& e : edges_) {
            const double d = u[e.i] - u[e.j];
            out[e.i] += 0.5 * e.weight * d;
            out[e.j] -= 0.5 * e.weight * d;
        }
        for (std::size_t i = 0; i < out.size(); ++i) out[i] /= measure_[i];
        return out;
    }

    /// T(t) u = exp(-t A) u; positivity-preserving and mass-conserving.
    std::vector<double> semigroup_apply(double t, const std::vector<double>& u) const {
        if (t < 0.0) throw std::invalid_argument("semigroup needs t >= 0");
        check_size(u);
        return spectral_map(u, [t](double lambda) { return std::exp(-t * lambda); });
    }

    /// G(alpha) u = (alpha + A)^{-1} u.
    std::vector<double> resolvent_apply(double alpha, const std::vector<double>& u) const {
        if (!(alpha > 0.0)) throw std::invalid_argument("resolvent needs alpha > 0");
        check_size(u);
        return spectral_map(u, [alpha](double lambda) { return 1.0 / (alpha + lambda); });
    }

    /// Eigenvalues of the generator, ascending.
    const std::vector<double>& eigenvalues() const {
        factorize();
        return cache_->evals;
    }

    /// The standard energy form of a circle model: conductances n/L scaled
    /// by the profile, arclength node measure; `normalized` divides both by
    /// the total volume (the generator is unaffected).
    static GraphDirichletForm circle(const CircleModel& model, bool normalized = true) {
        const std::size_t n = model.nodes();
        std::vector<Edge> edges;
        edges.reserve(n);
        const double vol = normalized ? model.circumference() : 1.0;
        for (std::size_t j = 0; j < n; ++j) {
            edges.push_back({j, (j + 1) % n, model.conductance(j) / vol});
        }
        std::vector<double> m(n, model.node_measure(0) / vol);
        return GraphDirichletForm(model.space(), std::move(edges), std::move(m));
    }

private:
    void check_size(const std::vector<double>& u) const {
        if (u.size() != size()) throw std::invalid_argument("function size does not match the form");
    }

    struct SpectralCache {
        std::mutex mutex;
        bool ready = false;
        Eigen::MatrixXd basis;
        std::vector<double> evals;
    };

    void factorize() const {
        std::scoped_lock lock(cache_->mutex);
        if (cache_->ready) return;
        const std::size_t n = size();
        if (n > kMaxSpectralNodes) {
            throw std::invalid_argument("form too large for dense spectral calculus");
        }
        // m-symmetrization B = D^{1/2} A D^{-1/2} with D = diag(m).
        Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
        for (const auto& e : edges_) {
            const double off = -0.5 * e.weight / std::sqrt(measure_[e.i] * measure_[e.j]);
            B(e.i, e.j) += off;
            B(e.j, e.i) += off;
            B(e.i, e.i) += 0.5 * e.weight / measure_[e.i];
            B(e.j, e.j) += 0.5 * e.weight / measure_[e.j];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(B);
        if (solver.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
        cache_->basis = solver.eigenvectors();
        cache_->evals.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
        for (double& v : cache_->evals) v = std::max(v, 0.0);  // clamp -0 level noise
        cache_->ready = true;
    }

    template <typename F>
    std::vector<double> spectral_map(const std::vector<double>& u, F&& f) const {
        factorize();
        const std::size_t n = size();
        Eigen::VectorXd v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = std::sqrt(measure_[i]) * u[i];
        Eigen::VectorXd w = cache_->basis.transpose() * v;
        for (std::size_t i = 0; i < n; ++i) w[i] *= f(cache_->evals[i]);
        Eigen::VectorXd back = cache_->basis * w;
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = back[i] / std::sqrt(measure_[i]);
        return out;
    }

    SpacePtr space_;
    std::vector<Edge> edges_;
    std::vector<double> measure_;
    std::shared_ptr<SpectralCache> cache_;  // shared across copies of one form
};

/// A density against a reference node measure; integrates to 1.
struct InitialDensity {
    std::vector<double> values;
    std::string measure_tag = "node-measure";

    void validate(const GraphDirichletForm& form) const {
        if (values.size() != form.size()) {
            throw std::invalid_argument("density size does not match the form");
        }
        double mass = 0.0, comp = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (values[i] < 0.0) throw std::invalid_argument("density must be nonnegative");
            const double y = form.measure()[i] * values[i] - comp;
            const double t = mass + y;
            comp = (t - mass) - y;
            mass = t;
        }
        if (std::abs(mass - 1.0) > kValidationTol) {
            throw std::invalid_argument("density must integrate to 1 against " + measure_tag);
        }
    }

    static InitialDensity uniform(const GraphDirichletForm& form) {
        InitialDensity d;
        d.values.assign(form.size(), 1.0 / form.total_mass());
        return d;
    }
};

}  // namespace lipro
