#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "lipro/cauchy_limit.hpp"
#include "lipro/isometry_search.hpp"
#include "lipro/metric_map.hpp"
#include "lipro/metric_space.hpp"

using namespace lipro;

namespace {

SpacePtr two_point(double d) {
    return make_space(FiniteMetricSpace({"a", "b"}, {{0.0, d}, {d, 0.0}}));
}

// d(a,b)=2, d(a,c)=3, d(b,c)=4; trivial isometry group.
SpacePtr scalene3() {
    return make_space(FiniteMetricSpace({"a", "b", "c"},
                                        {{0, 2, 3}, {2, 0, 4}, {3, 4, 0}}));
}

SpacePtr random_euclidean(std::mt19937_64& rng, std::size_t n, std::size_t dim = 3) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<std::vector<double>> pts(n, std::vector<double>(dim));
    for (auto& p : pts)
        for (auto& c : p) c = u(rng);
    return make_space(FiniteMetricSpace::from_points(pts));
}

// Scale every distance of X by s.
SpacePtr scaled(const SpacePtr& x, double s) {
    const std::size_t n = x->size();
    std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) d[i][j] = s * x->dist(i, j);
    return make_space(FiniteMetricSpace(x->labels(), d));
}

// Independent oracle: the defect of an assignment by exhaustive pair scan.
double defect_by_pair_scan(const FiniteMetricSpace& x, const FiniteMetricSpace& y,
                           const std::vector<std::size_t>& a) {
    double rmax = 0.0, rmin = 1e300;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            const double r = y.dist(a[i], a[j]) / x.dist(i, j);
            rmax = std::max(rmax, r);
            rmin = std::min(rmin, r);
        }
    return std::abs(std::log(rmax)) + std::abs(std::log(1.0 / rmin));
}

}  // namespace

TEST_CASE("space validation rejects bad inputs") {
    CHECK_THROWS(FiniteMetricSpace({"a", "b"}, {{0, 1}, {2, 0}}));          // asymmetric
    CHECK_THROWS(FiniteMetricSpace({"a", "b"}, {{0, 0}, {0, 0}}));          // zero off-diagonal
    CHECK_THROWS(FiniteMetricSpace({"a", "b"}, {{1, 1}, {1, 0}}));          // nonzero diagonal
    CHECK_THROWS(FiniteMetricSpace({"a", "b", "c"},
                                   {{0, 1, 5}, {1, 0, 1}, {5, 1, 0}}));     // triangle violated
    CHECK_NOTHROW(FiniteMetricSpace({"a", "b", "c"},
                                    {{0, 1, 2}, {1, 0, 1}, {2, 1, 0}}));    // boundary triangle ok
}

TEST_CASE("dilation") {
    SECTION("identity has dilation 1") {
        auto x = scalene3();
        CHECK(dilation(MetricMap::identity(x)) == 1.0);
    }
    SECTION("two-point d=1 vs d=2 natural map") {
        MetricMap f(two_point(1.0), two_point(2.0), {0, 1});
        CHECK(dilation(f) == 2.0);
        // oracle: single pair ratio by exhaustive scan
        CHECK(dilation(f) == 2.0 / 1.0);
    }
    SECTION("uniform scaling by 0.5") {
        auto x = scalene3();
        MetricMap f(x, scaled(x, 0.5), {0, 1, 2});
        CHECK(dilation(f) == 0.5);
    }
    SECTION("singleton rejected") {
        auto s = make_space(FiniteMetricSpace({"a"}, {{0.0}}));
        CHECK_THROWS_WITH(dilation(MetricMap::identity(s)),
                          "dilation undefined below two points");
    }
}

TEST_CASE("isometry defect") {
    SECTION("identity is a 0-isometry") {
        CHECK(isometry_defect(MetricMap::identity(scalene3())) == 0.0);
    }
    SECTION("uniform scaling by 2") {
        auto x = scalene3();
        MetricMap f(x, scaled(x, 2.0), {0, 1, 2});
        CHECK_THAT(isometry_defect(f), Catch::Matchers::WithinAbs(2.0 * std::log(2.0), 1e-15));
    }
    SECTION("swap of a,b on the scalene triple") {
        auto x = scalene3();
        MetricMap f(x, x, {1, 0, 2});
        // oracle: exhaustive pair-ratio scan gives dil f = dil f^-1 = 4/3
        CHECK(defect_by_pair_scan(*x, *x, {1, 0, 2}) ==
              Catch::Approx(2.0 * std::log(4.0 / 3.0)).epsilon(1e-14));
        CHECK_THAT(isometry_defect(f),
                   Catch::Matchers::WithinAbs(2.0 * std::log(4.0 / 3.0), 1e-14));
    }
}

TEST_CASE("lipschitz distance") {
    SECTION("d_L(X, X) = 0 with identity witness") {
        auto x = scalene3();
        const auto res = lipschitz_distance(x, x);
        CHECK(res.value == 0.0);
        REQUIRE(res.witness);
        CHECK(res.witness->assignment() == std::vector<std::size_t>{0, 1, 2});
    }
    SECTION("two-point d=1 vs d=2 gives 2 ln 2") {
        // oracle: both bijections, exhaustively
        auto x = two_point(1.0), y = two_point(2.0);
        double oracle = std::min(defect_by_pair_scan(*x, *y, {0, 1}),
                                 defect_by_pair_scan(*x, *y, {1, 0}));
        CHECK(oracle == Catch::Approx(2.0 * std::log(2.0)).epsilon(1e-14));
        CHECK(lipschitz_distance(x, y).value == oracle);
    }
    SECTION("cardinality mismatch is infinite") {
        std::mt19937_64 rng(7);
        const auto res = lipschitz_distance(random_euclidean(rng, 3), random_euclidean(rng, 4));
        CHECK(std::isinf(res.value));
        CHECK(res.method == "infinite");
        CHECK(!res.witness);
    }
}

TEST_CASE("lipschitz distance properties on random spaces") {
    std::mt19937_64 rng(20240801);
    SECTION("symmetry and zero iff permutation-equal") {
        for (int rep = 0; rep < 20; ++rep) {
            auto x = random_euclidean(rng, 4 + rep % 3);
            auto y = random_euclidean(rng, 4 + rep % 3);
            const auto xy = lipschitz_distance(x, y);
            const auto yx = lipschitz_distance(y, x);
            CHECK_THAT(xy.value, Catch::Matchers::WithinAbs(yx.value, 1e-12));
            CHECK(xy.value > 0.0);
        }
    }
    SECTION("triangle inequality") {
        for (int rep = 0; rep < 15; ++rep) {
            auto x = random_euclidean(rng, 5);
            auto y = random_euclidean(rng, 5);
            auto z = random_euclidean(rng, 5);
            const double xy = lipschitz_distance(x, y).value;
            const double yz = lipschitz_distance(y, z).value;
            const double xz = lipschitz_distance(x, z).value;
            CHECK(xz <= xy + yz + 1e-12);
        }
    }
    SECTION("dilation bounds under composition") {
        for (int rep = 0; rep < 20; ++rep) {
            auto x = random_euclidean(rng, 5);
            auto y = random_euclidean(rng, 5);
            auto z = random_euclidean(rng, 5);
            std::vector<std::size_t> a{0, 1, 2, 3, 4}, b{0, 1, 2, 3, 4};
            std::shuffle(a.begin(), a.end(), rng);
            std::shuffle(b.begin(), b.end(), rng);
            MetricMap f(x, y, a), g(y, z, b);
            const MetricMap gf = MetricMap::compose(g, f);
            CHECK(dilation(f) * dilation(f.inverse()) >= 1.0);
            // both dilations compose submultiplicatively
            CHECK(dilation(gf) <= dilation(f) * dilation(g) * (1.0 + 1e-12));
            CHECK(dilation(gf.inverse()) <=
                  dilation(f.inverse()) * dilation(g.inverse()) * (1.0 + 1e-12));
            // hence the composed defect is at most twice the defect sum
            CHECK(isometry_defect(gf) <=
                  2.0 * (isometry_defect(f) + isometry_defect(g)) + 1e-12);
        }
    }
    SECTION("the summed defect itself is not subadditive") {
        // Regression for a sharp corner: the two log-dilations compose
        // submultiplicatively, but their sum can grow. Equilateral triangle
        // stretched by factors {e^0.1, e^0.6, e^0.6}, then re-stretched by
        // {e^0.3, e^0.3, e^-0.1}: defects 0.7 and 0.4, composition 1.3.
        auto X = make_space(FiniteMetricSpace({"a", "b", "c"}, {{0, 1, 1}, {1, 0, 1}, {1, 1, 0}}));
        const double r01 = std::exp(0.1), r02 = std::exp(0.6), r12 = std::exp(0.6);
        auto Y = make_space(FiniteMetricSpace(
            {"a", "b", "c"}, {{0, r01, r02}, {r01, 0, r12}, {r02, r12, 0}}));
        const double s01 = std::exp(0.4), s02 = std::exp(0.9), s12 = std::exp(0.5);
        auto Z = make_space(FiniteMetricSpace(
            {"a", "b", "c"}, {{0, s01, s02}, {s01, 0, s12}, {s02, s12, 0}}));
        MetricMap f(X, Y, {0, 1, 2}), g(Y, Z, {0, 1, 2});
        CHECK_THAT(isometry_defect(f), Catch::Matchers::WithinAbs(0.7, 1e-12));
        CHECK_THAT(isometry_defect(g), Catch::Matchers::WithinAbs(0.4, 1e-12));
        CHECK_THAT(isometry_defect(MetricMap::compose(g, f)),
                   Catch::Matchers::WithinAbs(1.3, 1e-12));
    }
    SECTION("zero distance detects permuted copies") {
        for (int rep = 0; rep < 10; ++rep) {
            auto x = random_euclidean(rng, 5);
            std::vector<std::size_t> perm{0, 1, 2, 3, 4};
            std::shuffle(perm.begin(), perm.end(), rng);
            std::vector<std::vector<double>> d(5, std::vector<double>(5));
            for (std::size_t i = 0; i < 5; ++i)
                for (std::size_t j = 0; j < 5; ++j) d[perm[i]][perm[j]] = x->dist(i, j);
            auto y = make_space(FiniteMetricSpace(x->labels(), d));
            const auto res = lipschitz_distance(x, y);
            CHECK(res.value == 0.0);
            CHECK(isometry_defect(*res.witness) == 0.0);
        }
    }
    SECTION("branch-and-bound equals exhaustive") {
        for (int rep = 0; rep < 25; ++rep) {
            const std::size_t n = 4 + rep % 4;  // up to 7
            auto x = random_euclidean(rng, n);
            auto y = random_euclidean(rng, n);
            const auto ex = lipschitz_distance(x, y, /*exhaustive_limit=*/8);
            const auto bb = lipschitz_distance(x, y, /*exhaustive_limit=*/0);
            CHECK(bb.method == "branch-and-bound");
            CHECK(ex.value == bb.value);  // exact tie required
            CHECK(ex.witness->assignment() == bb.witness->assignment());
        }
    }
    SECTION("parallel search is deterministic") {
        auto x = random_euclidean(rng, 7);
        auto y = random_euclidean(rng, 7);
        const auto a = lipschitz_distance(x, y, 0, 1);
        const auto b = lipschitz_distance(x, y, 0, 4);
        CHECK(a.value == b.value);
        CHECK(a.witness->assignment() == b.witness->assignment());
    }
}

TEST_CASE("self isometries") {
    SECTION("two-point space has identity and swap") {
        auto maps = self_isometries(two_point(1.5));
        REQUIRE(maps.size() == 2);
        CHECK(maps[0].assignment() == std::vector<std::size_t>{0, 1});
        CHECK(maps[1].assignment() == std::vector<std::size_t>{1, 0});
    }
    SECTION("cycles have dihedral groups") {
        for (std::size_t n : {5, 6, 8}) {
            auto c = make_space(FiniteMetricSpace::cycle(n, 1.0));
            const auto maps = self_isometries(c);
            CHECK(maps.size() == 2 * n);
            for (const auto& f : maps) CHECK(isometry_defect(f) == 0.0);
        }
    }
    SECTION("scalene triple has only the identity") {
        // oracle: all 6 bijections checked by pair scan
        auto x = scalene3();
        int zero_defect = 0;
        std::vector<std::size_t> a{0, 1, 2};
        do {
            if (defect_by_pair_scan(*x, *x, a) == 0.0) ++zero_defect;
        } while (std::next_permutation(a.begin(), a.end()));
        CHECK(zero_defect == 1);
        const auto maps = self_isometries(x);
        REQUIRE(maps.size() == 1);
        CHECK(maps[0].assignment() == std::vector<std::size_t>{0, 1, 2});
    }
}

TEST_CASE("cauchy limit") {
    SECTION("identity chain returns the first space") {
        auto x = scalene3();
        CauchyInput in;
        in.spaces = {x, x, x};
        in.links = {MetricMap::identity(x), MetricMap::identity(x)};
        in.defects = {0.0, 0.0};
        const auto res = cauchy_limit(in);
        CHECK(res.limit->same_geometry(*x));
        CHECK(res.eps == std::vector<double>{0.0, 0.0, 0.0});
        for (const auto& f : res.to_limit) CHECK(isometry_defect(f) == 0.0);
    }
    SECTION("single space, no links") {
        auto x = scalene3();
        CauchyInput in;
        in.spaces = {x};
        const auto res = cauchy_limit(in);
        CHECK(res.limit->same_geometry(*x));
        CHECK(res.eps == std::vector<double>{0.0});
        CHECK(res.truncation_index == 0);
    }
    SECTION("scaling links reach the analytic partial product") {
        // Links scale by (1 + 2^-i); declared defects are the exact values
        // 2 ln(1 + 2^-i). The truncated limit matrix is d_1 times the partial
        // product of the supplied factors.
        auto x0 = scalene3();
        CauchyInput in;
        in.spaces.push_back(x0);
        double product = 1.0;
        const int links = 12;
        for (int i = 1; i <= links; ++i) {
            const double s = 1.0 + std::ldexp(1.0, -i);
            product *= s;
            in.spaces.push_back(scaled(x0, product));
            in.links.emplace_back(in.spaces[i - 1], in.spaces[i],
                                  std::vector<std::size_t>{0, 1, 2});
            in.defects.push_back(2.0 * std::log(s));
        }
        const auto res = cauchy_limit(in);
        for (std::size_t a = 0; a < 3; ++a)
            for (std::size_t b = 0; b < 3; ++b)
                CHECK_THAT(res.limit->dist(a, b),
                           Catch::Matchers::WithinAbs(product * x0->dist(a, b), 1e-12));
        // tail sums of the declared defects
        for (std::size_t i = 0; i < in.spaces.size(); ++i) {
            double tail = 0.0;
            for (std::size_t l = i; l < in.defects.size(); ++l) tail += in.defects[l];
            CHECK(res.eps[i] == Catch::Approx(tail).margin(1e-15));
        }
        // coordinate identity f_j o ~f_ij = f_i, exact on permutations
        for (std::size_t i = 0; i + 1 < in.spaces.size(); ++i) {
            const auto lhs = MetricMap::compose(res.to_limit[i + 1], in.links[i]);
            CHECK(lhs.assignment() == res.to_limit[i].assignment());
        }
    }
    SECTION("violated defect declarations are rejected") {
        auto x = scalene3();
        CauchyInput in;
        in.spaces = {x, scaled(x, 2.0)};
        in.links = {MetricMap(x, in.spaces[1], {0, 1, 2})};
        in.defects = {0.1};  // actual defect is 2 ln 2
        CHECK_THROWS(cauchy_limit(in));
    }
    SECTION("non-composable links are rejected") {
        auto x = scalene3();
        auto y = scaled(x, 2.0);
        CauchyInput in;
        in.spaces = {x, y};
        in.links = {MetricMap::identity(x)};  // wrong target
        in.defects = {0.0};
        CHECK_THROWS(cauchy_limit(in));
    }
}
