#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "lipro/lp_metric.hpp"

using namespace lipro;

namespace {

SpacePtr two_point(double d) {
    return make_space(FiniteMetricSpace({"a", "b"}, {{0.0, d}, {d, 0.0}}));
}

SpacePtr scalene3() {
    return make_space(FiniteMetricSpace({"a", "b", "c"},
                                        {{0, 2, 3}, {2, 0, 4}, {3, 4, 0}}));
}

SpacePtr random_euclidean(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<std::vector<double>> pts(n, std::vector<double>(3));
    for (auto& p : pts)
        for (auto& c : p) c = u(rng);
    return make_space(FiniteMetricSpace::from_points(pts));
}

GridPathMeasure random_measure(std::mt19937_64& rng, const SpacePtr& space, const TimeGrid& grid,
                               std::size_t max_atoms) {
    const std::size_t k = 1 + rng() % max_atoms;
    std::vector<int> shares(k, 1);
    int total = static_cast<int>(k);
    while (total < 32) {
        ++shares[rng() % k];
        ++total;
    }
    std::vector<GridPathMeasure::Atom> atoms;
    for (std::size_t i = 0; i < k; ++i) {
        std::vector<std::uint32_t> vals(grid.points());
        for (auto& v : vals) v = static_cast<std::uint32_t>(rng() % space->size());
        atoms.push_back({GridPath(grid, vals), shares[i] / 32.0});
    }
    return GridPathMeasure(space, grid, atoms);
}

PairInstance random_instance(std::mt19937_64& rng, std::size_t n, const TimeGrid& grid,
                             std::size_t max_atoms) {
    auto space = random_euclidean(rng, n);
    return PairInstance(space, random_measure(rng, space, grid, max_atoms));
}

const TimeGrid kGrid(1.0, 2);

}  // namespace

TEST_CASE("certificate verify") {
    SECTION("identical pairs, identity, (0,0)") {
        auto x = scalene3();
        PairInstance A(x, GridPathMeasure::dirac(x, constant_path(0, kGrid)));
        IsoCertificate cert{MetricMap::identity(x), 0.0, 0.0};
        const auto rep = certificate_verify(cert, A, A);
        CHECK(rep.ok);
        CHECK(rep.defect == 0.0);
        CHECK(rep.dp_forward == 0.0);
    }
    SECTION("C_12 rotation by 3 with Diracs 3 apart accepts (0,0)") {
        auto c12 = make_space(FiniteMetricSpace::cycle(12, 1.0));
        PairInstance A(c12, GridPathMeasure::dirac(c12, constant_path(0, kGrid)));
        PairInstance B(c12, GridPathMeasure::dirac(c12, constant_path(3, kGrid)));
        std::vector<std::size_t> rot(12);
        for (std::size_t i = 0; i < 12; ++i) rot[i] = (i + 3) % 12;
        const auto rep = certificate_verify(IsoCertificate{MetricMap(c12, c12, rot), 0.0, 0.0}, A, B);
        CHECK(rep.ok);
    }
    SECTION("identity with too small delta is rejected") {
        auto c12 = make_space(FiniteMetricSpace::cycle(12, 1.0));
        PairInstance A(c12, GridPathMeasure::dirac(c12, constant_path(0, kGrid)));
        PairInstance B(c12, GridPathMeasure::dirac(c12, constant_path(3, kGrid)));
        const double d = c12->dist(0, 3);
        const auto rep = certificate_verify(
            IsoCertificate{MetricMap::identity(c12), 0.0, d - 1e-6}, A, B);
        CHECK(!rep.ok);
        CHECK(rep.delta_slack < 0.0);
        CHECK(certificate_verify(IsoCertificate{MetricMap::identity(c12), 0.0, d}, A, B).ok);
    }
}

TEST_CASE("certificate value closed form") {
    SECTION("identity on identical pairs") {
        auto x = scalene3();
        PairInstance A(x, GridPathMeasure::dirac(x, constant_path(1, kGrid)));
        const auto cv = certificate_value(MetricMap::identity(x), A, A);
        CHECK(cv.value == 0.0);
        CHECK(cv.eps == 0.0);
        CHECK(cv.delta == 0.0);
    }
    SECTION("swap on the scalene triple with swapped Diracs") {
        auto x = scalene3();
        PairInstance A(x, GridPathMeasure::dirac(x, constant_path(0, kGrid)));
        PairInstance B(x, GridPathMeasure::dirac(x, constant_path(1, kGrid)));
        const auto cv = certificate_value(MetricMap(x, x, {1, 0, 2}), A, B);
        CHECK(cv.dp_forward == 0.0);
        CHECK(cv.dp_backward == 0.0);
        CHECK_THAT(cv.value, Catch::Matchers::WithinAbs(2.0 * std::log(4.0 / 3.0), 1e-14));
        // the returned pair verifies
        CHECK(certificate_verify(IsoCertificate{MetricMap(x, x, {1, 0, 2}), cv.eps, cv.delta},
                                 A, B).ok);
    }
    SECTION("identity on the same instance pays the full Dirac distance") {
        auto x = scalene3();
        PairInstance A(x, GridPathMeasure::dirac(x, constant_path(0, kGrid)));
        PairInstance B(x, GridPathMeasure::dirac(x, constant_path(1, kGrid)));
        const auto cv = certificate_value(MetricMap::identity(x), A, B);
        // eps_f = 0, c = min(d(a,b), 1) = 1, value = 0 + 1
        CHECK(cv.eps == 0.0);
        CHECK(cv.delta == 1.0);
        CHECK(cv.value == 1.0);
    }
}

TEST_CASE("dlp exact") {
    SECTION("d_LP(A, A) = 0") {
        auto x = scalene3();
        PairInstance A(x, GridPathMeasure::dirac(x, constant_path(2, kGrid)));
        const auto res = dlp_exact(A, A);
        CHECK(res.value == 0.0);
        CHECK(res.mode == "exact");
    }
    SECTION("scalene Dirac pair: swap wins over all 6 bijections") {
        auto x = scalene3();
        PairInstance A(x, GridPathMeasure::dirac(x, constant_path(0, kGrid)));
        PairInstance B(x, GridPathMeasure::dirac(x, constant_path(1, kGrid)));
        // oracle: exhaustive over all bijections via certificate_value
        double oracle = std::numeric_limits<double>::infinity();
        std::vector<std::size_t> a{0, 1, 2};
        do {
            oracle = std::min(oracle, certificate_value(MetricMap(x, x, a), A, B).value);
        } while (std::next_permutation(a.begin(), a.end()));
        CHECK_THAT(oracle, Catch::Matchers::WithinAbs(2.0 * std::log(4.0 / 3.0), 1e-14));
        const auto res = dlp_exact(A, B);
        CHECK(res.value == oracle);
        REQUIRE(res.certificate);
        CHECK(res.certificate->f.assignment() == std::vector<std::size_t>{1, 0, 2});
    }
    SECTION("C_6 Diracs at distinct nodes vanish via a rotation") {
        auto c6 = make_space(FiniteMetricSpace::cycle(6, 1.0));
        PairInstance A(c6, GridPathMeasure::dirac(c6, constant_path(1, kGrid)));
        PairInstance B(c6, GridPathMeasure::dirac(c6, constant_path(4, kGrid)));
        const auto res = dlp_exact(A, B);
        CHECK(res.value == 0.0);
        CHECK(certificate_verify(*res.certificate, A, B).ok);
    }
    SECTION("cardinality mismatch is infinite") {
        std::mt19937_64 rng(3);
        auto A = random_instance(rng, 3, kGrid, 2);
        auto B = random_instance(rng, 4, kGrid, 2);
        const auto res = dlp_exact(A, B);
        CHECK(std::isinf(res.value));
        CHECK(res.mode == "infinite");
    }
    SECTION("parallel search is deterministic") {
        std::mt19937_64 rng(14);
        auto A = random_instance(rng, 5, kGrid, 3);
        auto B = random_instance(rng, 5, kGrid, 3);
        const auto one = dlp_exact(A, B, 8, 1);
        const auto four = dlp_exact(A, B, 8, 4);
        CHECK(one.value == four.value);
        CHECK(one.certificate->f.assignment() == four.certificate->f.assignment());
    }
    SECTION("singleton spaces compare through their measures") {
        auto s1 = make_space(FiniteMetricSpace({"p"}, {{0.0}}));
        auto s2 = make_space(FiniteMetricSpace({"q"}, {{0.0}}));
        PairInstance A(s1, GridPathMeasure::dirac(s1, constant_path(0, kGrid)));
        PairInstance B(s2, GridPathMeasure::dirac(s2, constant_path(0, kGrid)));
        const auto res = dlp_exact(A, B);
        CHECK(res.value == 0.0);
        CHECK(res.mode == "exact");
    }
}

TEST_CASE("dlp on a shared space") {
    SECTION("P = Q") {
        auto c6 = make_space(FiniteMetricSpace::cycle(6, 1.0));
        PairInstance A(c6, GridPathMeasure::dirac(c6, constant_path(0, kGrid)));
        CHECK(dlp_same_space(A, A) == 0.0);
    }
    SECTION("C_12 Diracs 3 apart: 0 by rotation, d_P positive") {
        auto c12 = make_space(FiniteMetricSpace::cycle(12, 1.0));
        PairInstance A(c12, GridPathMeasure::dirac(c12, constant_path(0, kGrid)));
        PairInstance B(c12, GridPathMeasure::dirac(c12, constant_path(3, kGrid)));
        CHECK(dlp_same_space(A, B) == 0.0);
        CHECK(prokhorov_distance(A.measure, B.measure).value == c12->dist(0, 3));
    }
    SECTION("trivial isometry group forces the Dirac formula") {
        auto x = scalene3();
        PairInstance A(x, GridPathMeasure::dirac(x, constant_path(0, kGrid)));
        PairInstance B(x, GridPathMeasure::dirac(x, constant_path(1, kGrid)));
        CHECK(dlp_same_space(A, B) == 1.0);  // min(d(a,b), 1) with d(a,b) = 2
    }
    SECTION("never exceeds the plain Prokhorov distance") {
        std::mt19937_64 rng(31);
        const TimeGrid grid(1.0, 1);
        for (int rep = 0; rep < 10; ++rep) {
            auto space = random_euclidean(rng, 4);
            PairInstance A(space, random_measure(rng, space, grid, 3));
            PairInstance B(space, random_measure(rng, space, grid, 3));
            CHECK(dlp_same_space(A, B) <=
                  prokhorov_distance(A.measure, B.measure).value + 1e-12);
        }
    }
}

TEST_CASE("certificate composition") {
    auto x = two_point(1.0);

    SECTION("composing with an identity (0,0) certificate keeps the levels") {
        IsoCertificate id{MetricMap::identity(x), 0.0, 0.0};
        IsoCertificate c{MetricMap::identity(x), 0.3, 0.2};
        const auto comp = certificate_compose(c, id);
        CHECK(comp.eps == 0.3);
        CHECK(comp.delta == 0.2);
    }
    SECTION("two rotation certificates on C_12 compose to (0,0)") {
        auto c12 = make_space(FiniteMetricSpace::cycle(12, 1.0));
        auto rot = [&](std::size_t k) {
            std::vector<std::size_t> a(12);
            for (std::size_t i = 0; i < 12; ++i) a[i] = (i + k) % 12;
            return MetricMap(c12, c12, a);
        };
        PairInstance A(c12, GridPathMeasure::dirac(c12, constant_path(0, kGrid)));
        PairInstance B(c12, GridPathMeasure::dirac(c12, constant_path(3, kGrid)));
        PairInstance C(c12, GridPathMeasure::dirac(c12, constant_path(7, kGrid)));
        IsoCertificate c1{rot(3), 0.0, 0.0};
        IsoCertificate c2{rot(4), 0.0, 0.0};
        REQUIRE(certificate_verify(c1, A, B).ok);
        REQUIRE(certificate_verify(c2, B, C).ok);
        const auto comp = certificate_compose(c1, c2);
        CHECK(comp.eps == 0.0);
        CHECK(comp.delta == 0.0);
        CHECK(certificate_verify(comp, A, C).ok);
    }
    SECTION("(0.2, 0.1) and (0.3, 0.05) compose to an accepted (0.5, 0.15)") {
        // Constructed triple on one two-point space: mixtures whose Prokhorov
        // distances sit exactly at the certified levels.
        const double e1 = 0.2, d1 = 0.1, e2 = 0.3, d2 = 0.05;
        const double q = d1 * std::exp(e1);
        const double r = q + d2 * std::exp(e2);
        GridPathMeasure Pm = GridPathMeasure::dirac(x, constant_path(0, kGrid));
        GridPathMeasure Qm(x, kGrid, {{constant_path(0, kGrid), 1.0 - q},
                                      {constant_path(1, kGrid), q}});
        GridPathMeasure Rm(x, kGrid, {{constant_path(0, kGrid), 1.0 - r},
                                      {constant_path(1, kGrid), r}});
        PairInstance A(x, Pm), B(x, Qm), C(x, Rm);
        IsoCertificate c1{MetricMap::identity(x), e1, d1};
        IsoCertificate c2{MetricMap::identity(x), e2, d2};
        REQUIRE(certificate_verify(c1, A, B).ok);
        REQUIRE(certificate_verify(c2, B, C).ok);
        const auto comp = certificate_compose(c1, c2);
        CHECK(comp.eps == 0.5);
        CHECK_THAT(comp.delta, Catch::Matchers::WithinAbs(0.15, 1e-15));
        CHECK(certificate_verify(comp, A, C).ok);

        // Replacing e^eps by 1 breaks exactly this composition: the check at
        // level (delta1 + delta2) * e^0 fails.
        CHECK(!modified_inequality_check(A.measure, C.measure, comp.f, 0.0, comp.delta).ok);
    }
    SECTION("composition stays sound when the summed defect grows") {
        // The composed map of two tight certificates can have a defect above
        // eps1 + eps2 (the log-dilation sum is not subadditive); compose must
        // then raise eps to the actual defect and keep the certified level.
        auto X = make_space(FiniteMetricSpace({"a", "b", "c"}, {{0, 1, 1}, {1, 0, 1}, {1, 1, 0}}));
        const double r01 = std::exp(0.1), r02 = std::exp(0.6), r12 = std::exp(0.6);
        auto Y = make_space(FiniteMetricSpace(
            {"a", "b", "c"}, {{0, r01, r02}, {r01, 0, r12}, {r02, r12, 0}}));
        const double s01 = std::exp(0.4), s02 = std::exp(0.9), s12 = std::exp(0.5);
        auto Z = make_space(FiniteMetricSpace(
            {"a", "b", "c"}, {{0, s01, s02}, {s01, 0, s12}, {s02, s12, 0}}));
        MetricMap f(X, Y, {0, 1, 2}), g(Y, Z, {0, 1, 2});
        PairInstance A(X, GridPathMeasure::dirac(X, constant_path(0, kGrid)));
        PairInstance B(Y, GridPathMeasure::dirac(Y, constant_path(0, kGrid)));
        PairInstance C(Z, GridPathMeasure::dirac(Z, constant_path(0, kGrid)));
        IsoCertificate c1{f, isometry_defect(f), 0.0};
        IsoCertificate c2{g, isometry_defect(g), 0.0};
        REQUIRE(certificate_verify(c1, A, B).ok);
        REQUIRE(certificate_verify(c2, B, C).ok);
        const auto comp = certificate_compose(c1, c2);
        CHECK_THAT(comp.eps, Catch::Matchers::WithinAbs(1.3, 1e-12));  // the true defect
        CHECK(certificate_verify(comp, A, C).ok);
    }
}

TEST_CASE("metric axioms at the certified level") {
    std::mt19937_64 rng(20250101);
    const TimeGrid grid(1.0, 1);
    for (int rep = 0; rep < 12; ++rep) {
        const std::size_t n = 3 + rep % 3;  // up to 5 points
        auto sx = random_euclidean(rng, n);
        auto sy = random_euclidean(rng, n);
        auto sz = random_euclidean(rng, n);
        PairInstance A(sx, random_measure(rng, sx, grid, 3));
        PairInstance B(sy, random_measure(rng, sy, grid, 3));
        PairInstance C(sz, random_measure(rng, sz, grid, 3));
        const double ab = dlp_exact(A, B).value;
        const double ba = dlp_exact(B, A).value;
        const double bc = dlp_exact(B, C).value;
        const double ac = dlp_exact(A, C).value;
        CHECK_THAT(ab, Catch::Matchers::WithinAbs(ba, 1e-12));
        CHECK(ac <= ab + bc + 1e-9);
        // certificate_value is an upper bound for every bijection
        std::vector<std::size_t> a(n);
        for (std::size_t i = 0; i < n; ++i) a[i] = i;
        std::shuffle(a.begin(), a.end(), rng);
        CHECK(certificate_value(MetricMap(sx, sy, a), A, B).value >= ab - 1e-12);
    }
}

TEST_CASE("zero distance produces an accepted (0,0) certificate") {
    auto c6 = make_space(FiniteMetricSpace::cycle(6, 1.0));
    PairInstance A(c6, GridPathMeasure::dirac(c6, constant_path(0, kGrid)));
    PairInstance B(c6, GridPathMeasure::dirac(c6, constant_path(2, kGrid)));
    const auto res = dlp_exact(A, B);
    REQUIRE(res.value == 0.0);
    REQUIRE(res.certificate);
    CHECK(res.certificate->eps == 0.0);
    CHECK(res.certificate->delta == 0.0);
    CHECK(certificate_verify(*res.certificate, A, B).ok);
}

TEST_CASE("upper bound mode") {
    auto c12 = make_space(FiniteMetricSpace::cycle(12, 1.0));
    PairInstance A(c12, GridPathMeasure::dirac(c12, constant_path(0, kGrid)));
    PairInstance B(c12, GridPathMeasure::dirac(c12, constant_path(5, kGrid)));
    // Seeding with the identity and composing with the dihedral group must
    // discover the exact rotation witness.
    const auto res = dlp_upper_bound(A, B, {MetricMap::identity(c12)}, true);
    CHECK(res.mode == "upper-bound");
    CHECK(res.value == 0.0);
    CHECK(certificate_verify(*res.certificate, A, B).ok);
}

TEST_CASE("convergence report") {
    auto c6 = make_space(FiniteMetricSpace::cycle(6, 1.0));
    PairInstance target(c6, GridPathMeasure::dirac(c6, constant_path(0, kGrid)));
    SECTION("constant sequence with identities is identically zero") {
        std::vector<PairInstance> seq(3, target);
        std::vector<MetricMap> maps(3, MetricMap::identity(c6));
        const auto rep = convergence_report(seq, target, maps);
        for (const auto& row : rep.rows) {
            CHECK(row.value == 0.0);
            CHECK(row.eps == 0.0);
        }
        CHECK(rep.non_monotone.empty());
    }
    SECTION("a corrupted instance is flagged as non-monotone") {
        PairInstance near1(c6, GridPathMeasure(c6, kGrid, {{constant_path(0, kGrid), 0.9},
                                                           {constant_path(1, kGrid), 0.1}}));
        PairInstance corrupted(c6, GridPathMeasure(c6, kGrid, {{constant_path(0, kGrid), 0.5},
                                                               {constant_path(3, kGrid), 0.5}}));
        PairInstance near2(c6, GridPathMeasure(c6, kGrid, {{constant_path(0, kGrid), 0.95},
                                                           {constant_path(1, kGrid), 0.05}}));
        std::vector<PairInstance> seq{near1, corrupted, near2};
        std::vector<MetricMap> maps(3, MetricMap::identity(c6));
        const auto rep = convergence_report(seq, target, maps);
        REQUIRE(rep.non_monotone.size() == 1);
        CHECK(rep.non_monotone[0] == 1);
    }
    SECTION("coupled-bound rows use the same closed form") {
        std::vector<CoupledEntry> entries{{0.2, 0.3}, {0.1, 0.2}, {0.05, 0.1}};
        const auto rep = convergence_report_coupled(entries);
        REQUIRE(rep.rows.size() == 3);
        for (std::size_t i = 0; i < 3; ++i) {
            const double expect = entries[i].eps + entries[i].dp_bound * std::exp(-entries[i].eps);
            CHECK_THAT(rep.rows[i].value, Catch::Matchers::WithinAbs(expect, 1e-15));
        }
        CHECK(rep.non_monotone.empty());
        CHECK(rep.log_slope < 0.0);
    }
}
