#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "lipro/metric_map.hpp"
#include "lipro/metric_space.hpp"
#include "lipro/path_space.hpp"
#include "lipro/prokhorov.hpp"

using namespace lipro;

namespace {

SpacePtr two_point(double d) {
    return make_space(FiniteMetricSpace({"a", "b"}, {{0.0, d}, {d, 0.0}}));
}

SpacePtr random_euclidean(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<std::vector<double>> pts(n, std::vector<double>(3));
    for (auto& p : pts)
        for (auto& c : p) c = u(rng);
    return make_space(FiniteMetricSpace::from_points(pts));
}

// Random measure with dyadic weights (exactly summing to 1) over <= k atoms.
GridPathMeasure random_measure(std::mt19937_64& rng, const SpacePtr& space, const TimeGrid& grid,
                               std::size_t max_atoms) {
    const std::size_t k = 1 + rng() % max_atoms;
    std::vector<int> shares(k, 1);
    int total = static_cast<int>(k);
    while (total < 64) {
        ++shares[rng() % k];
        ++total;
    }
    std::vector<GridPathMeasure::Atom> atoms;
    for (std::size_t i = 0; i < k; ++i) {
        std::vector<std::uint32_t> vals(grid.points());
        for (auto& v : vals) v = static_cast<std::uint32_t>(rng() % space->size());
        atoms.push_back({GridPath(grid, vals), shares[i] / 64.0});
    }
    return GridPathMeasure(space, grid, atoms);
}

}  // namespace

TEST_CASE("prokhorov distance on basic instances") {
    const TimeGrid grid(1.0, 2);
    SECTION("identical measures") {
        auto x = two_point(0.8);
        GridPathMeasure P(x, grid, {{constant_path(0, grid), 0.5}, {constant_path(1, grid), 0.5}});
        const auto res = prokhorov_distance(P, P);
        CHECK(res.value == 0.0);
        CHECK(res.witness.total == 1.0);
    }
    SECTION("Diracs at constant paths") {
        for (double d : {0.3, 0.8, 1.0, 2.5}) {
            auto x = two_point(d);
            auto P = GridPathMeasure::dirac(x, constant_path(0, grid));
            auto Q = GridPathMeasure::dirac(x, constant_path(1, grid));
            CHECK(prokhorov_distance(P, Q).value == std::min(d, 1.0));
            CHECK(prokhorov_bruteforce(P, Q) == std::min(d, 1.0));
        }
    }
    SECTION("half-half against a Dirac, d = 0.8") {
        auto x = two_point(0.8);
        GridPathMeasure P(x, grid, {{constant_path(0, grid), 0.5}, {constant_path(1, grid), 0.5}});
        auto Q = GridPathMeasure::dirac(x, constant_path(0, grid));
        // oracle first, then the flow answer
        CHECK(prokhorov_bruteforce(P, Q) == 0.5);
        CHECK(prokhorov_distance(P, Q).value == 0.5);
    }
    SECTION("half-half against a Dirac, d = 0.2: distance caps at d") {
        auto x = two_point(0.2);
        GridPathMeasure P(x, grid, {{constant_path(0, grid), 0.5}, {constant_path(1, grid), 0.5}});
        auto Q = GridPathMeasure::dirac(x, constant_path(0, grid));
        CHECK(prokhorov_bruteforce(P, Q) == 0.2);
        CHECK(prokhorov_distance(P, Q).value == 0.2);
    }
    SECTION("mismatched grids or spaces are rejected") {
        auto x = two_point(1.0);
        auto P = GridPathMeasure::dirac(x, constant_path(0, grid));
        auto Q = GridPathMeasure::dirac(x, constant_path(0, TimeGrid(1.0, 3)));
        CHECK_THROWS(prokhorov_distance(P, Q));
        auto R = GridPathMeasure::dirac(two_point(2.0), constant_path(0, grid));
        CHECK_THROWS(prokhorov_distance(P, R));
    }
}

TEST_CASE("flow equals subset oracle on random instances") {
    std::mt19937_64 rng(987654);
    const TimeGrid grid(1.0, 1);
    for (int rep = 0; rep < 60; ++rep) {
        auto space = random_euclidean(rng, 3 + rep % 4);  // up to 6 points
        auto P = random_measure(rng, space, grid, 5);
        auto Q = random_measure(rng, space, grid, 5);
        const double flow = prokhorov_distance(P, Q).value;
        const double oracle = prokhorov_bruteforce(P, Q);
        CHECK_THAT(flow, Catch::Matchers::WithinAbs(oracle, 1e-9));
    }
}

TEST_CASE("prokhorov metric properties") {
    std::mt19937_64 rng(13579);
    const TimeGrid grid(1.0, 1);
    SECTION("symmetry and triangle inequality") {
        for (int rep = 0; rep < 25; ++rep) {
            auto space = random_euclidean(rng, 4);
            auto P = random_measure(rng, space, grid, 4);
            auto Q = random_measure(rng, space, grid, 4);
            auto R = random_measure(rng, space, grid, 4);
            const double pq = prokhorov_distance(P, Q).value;
            const double qp = prokhorov_distance(Q, P).value;
            const double qr = prokhorov_distance(Q, R).value;
            const double pr = prokhorov_distance(P, R).value;
            CHECK_THAT(pq, Catch::Matchers::WithinAbs(qp, 1e-9));
            CHECK(pr <= pq + qr + 1e-9);
        }
    }
    SECTION("bounded by one; zero iff equal atom sets") {
        for (int rep = 0; rep < 25; ++rep) {
            auto space = random_euclidean(rng, 4);
            auto P = random_measure(rng, space, grid, 4);
            auto Q = random_measure(rng, space, grid, 4);
            const double v = prokhorov_distance(P, Q).value;
            CHECK(v <= 1.0);
            CHECK((v == 0.0) == (P == Q));
        }
    }
    SECTION("witness coupling certifies the value exactly") {
        for (int rep = 0; rep < 25; ++rep) {
            auto space = random_euclidean(rng, 5);
            auto P = random_measure(rng, space, grid, 5);
            auto Q = random_measure(rng, space, grid, 5);
            const auto res = prokhorov_distance(P, Q);
            CHECK(res.witness.total >= 1.0 - res.value - 1e-15);
            for (std::size_t r = 0; r < res.witness.rows; ++r) {
                for (std::size_t c = 0; c < res.witness.cols; ++c) {
                    if (res.witness(r, c) > 0.0) {
                        CHECK(uniform_metric(*space, P.atoms()[r].path, Q.atoms()[c].path) <=
                              res.value);
                    }
                }
            }
            // marginal feasibility
            for (std::size_t r = 0; r < res.witness.rows; ++r) {
                double row = 0.0;
                for (std::size_t c = 0; c < res.witness.cols; ++c) row += res.witness(r, c);
                CHECK(row <= P.atoms()[r].weight + 1e-15);
            }
            for (std::size_t c = 0; c < res.witness.cols; ++c) {
                double col = 0.0;
                for (std::size_t r = 0; r < res.witness.rows; ++r) col += res.witness(r, c);
                CHECK(col <= Q.atoms()[c].weight + 1e-15);
            }
        }
    }
}

TEST_CASE("modified inequality check") {
    const TimeGrid grid(1.0, 2);
    SECTION("equal Diracs with identity and (0,0)") {
        auto x = two_point(1.0);
        auto P = GridPathMeasure::dirac(x, constant_path(0, grid));
        CHECK(modified_inequality_check(P, P, MetricMap::identity(x), 0.0, 0.0).ok);
    }
    SECTION("Diracs at distance d, identity, eps=0: threshold at delta = d") {
        const double d = 0.6;
        auto x = two_point(d);
        auto P = GridPathMeasure::dirac(x, constant_path(0, grid));
        auto Q = GridPathMeasure::dirac(x, constant_path(1, grid));
        CHECK(modified_inequality_check(P, Q, MetricMap::identity(x), 0.0, d).ok);
        const auto bad = modified_inequality_check(P, Q, MetricMap::identity(x), 0.0, d - 1e-6);
        CHECK(!bad.ok);
        CHECK(bad.violated == "forward");
        CHECK(bad.excess > 0.0);
    }
    SECTION("rotation mapping c_x onto c_y passes at (0,0)") {
        auto c12 = make_space(FiniteMetricSpace::cycle(12, 1.0));
        auto P = GridPathMeasure::dirac(c12, constant_path(0, grid));
        auto Q = GridPathMeasure::dirac(c12, constant_path(3, grid));
        std::vector<std::size_t> rot(12);
        for (std::size_t i = 0; i < 12; ++i) rot[i] = (i + 3) % 12;
        CHECK(modified_inequality_check(P, Q, MetricMap(c12, c12, rot), 0.0, 0.0).ok);
    }
}

TEST_CASE("coupled prokhorov bound") {
    SECTION("all-zero pairs certify zero") {
        CHECK(coupled_prokhorov_bound(std::vector<double>(100, 0.0)) == 0.0);
    }
    SECTION("matches the exact value for a simple pairing") {
        // 10% of pairs at distance 0.5, rest at 0: least delta with
        // frac(d > delta) <= delta is 0.1.
        std::vector<double> dc(90, 0.0);
        dc.insert(dc.end(), 10, 0.5);
        CHECK(coupled_prokhorov_bound(dc) == Catch::Approx(0.1));
    }
    SECTION("wilson upper bound dominates the plug-in value") {
        std::vector<double> dc(990, 0.0);
        dc.insert(dc.end(), 10, 0.4);
        CHECK(coupled_prokhorov_bound(dc, 1.96) >= coupled_prokhorov_bound(dc));
    }
}
