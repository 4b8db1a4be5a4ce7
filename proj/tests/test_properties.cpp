// Seeded property suites. Every generator is a fixed mt19937_64 stream, so
// a failure names the seed that reproduces it.

#include "support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

using namespace morseland;

namespace {

constexpr std::uint64_t first_seed = 2000;
constexpr int landscapes = 12;

Vec sample_inside(const Landscape& land, std::mt19937_64& rng) {
    auto [lo, hi] = land.domain().bounds();
    std::uniform_real_distribution<double> u(lo, hi);
    Vec x(land.dimension());
    do
        for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = u(rng);
    while (!land.contains(x));
    return x;
}

}  // namespace

TEST_CASE("random landscapes: energy decreases along flow lines", "[properties]") {
    for (int k = 0; k < landscapes; ++k) {
        const std::uint64_t seed = first_seed + k;
        CAPTURE(seed);
        const Landscape land = support::random_polynomial(seed);
        std::mt19937_64 rng(seed);
        for (int s = 0; s < 4; ++s) {
            const auto tr = integrate(land, sample_inside(land, rng), 0.01, 30.0);
            for (std::size_t i = 1; i < tr.energies.size(); ++i) REQUIRE(tr.energies[i] <= tr.energies[i - 1] + 1e-12);
        }
    }
}

TEST_CASE("every landscape: analytic gradient matches finite differences", "[properties]") {
    std::vector<support::NamedLandscape> items = support::builtin_landscapes();
    for (int k = 0; k < landscapes; ++k)
        items.push_back({"random-" + std::to_string(first_seed + k), support::random_polynomial(first_seed + k)});
    std::mt19937_64 rng(77);
    for (const auto& it : items) {
        CAPTURE(it.name);
        for (int s = 0; s < 30; ++s) CHECK(support::gradient_fd_error(it.land, sample_inside(it.land, rng)) < 1e-6);
    }
}

TEST_CASE("random landscapes: census, index sum, DAG axioms and tilt stability", "[properties]") {
    for (int k = 0; k < landscapes; ++k) {
        const std::uint64_t seed = first_seed + k;
        CAPTURE(seed);
        const Landscape land = support::random_polynomial(seed);
        const Census c = find_critical_points(land);
        REQUIRE(morse_report(c).morse_ok);
        CHECK(poincare_hopf_check(c).pass);
        // Refining the seed lattice finds the same points.
        const Census fine = find_critical_points(land, 36);
        REQUIRE(fine.size() == c.size());
        for (std::size_t i = 0; i < c.size(); ++i) CHECK((fine[i].location - c[i].location).norm() < 1e-6);

        const LandscapeDag dag = build_dag(land, c);
        CHECK(check_axioms(dag).all());
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> nd;
        Vec t(2);
        t << nd(rng), nd(rng);
        const Landscape moved = land.tilted(1e-3 * t / t.norm());
        const Census cm = find_critical_points(moved);
        CHECK(diagram_isomorphic(dag, build_dag(moved, cm)));
    }
}

TEST_CASE("tilting is additive", "[properties]") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    for (int k = 0; k < 20; ++k) {
        const Landscape land = support::random_polynomial(first_seed + k % landscapes);
        const Vec a = Vec(Eigen::Vector2d(nd(rng), nd(rng))), b = Vec(Eigen::Vector2d(nd(rng), nd(rng)));
        const Vec x = support::random_point(rng, 2, 2.5);
        CHECK(std::abs(land.tilted(a).tilted(b).value(x) - land.tilted(a + b).value(x)) < 1e-12);
    }
}

TEST_CASE("transitive closure is idempotent and contains its input", "[properties]") {
    std::mt19937_64 rng(11);
    for (int k = 0; k < 50; ++k) {
        const int n = 2 + static_cast<int>(rng() % 7);
        std::vector<Edge> edges;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < i; ++j)
                if (rng() % 3 == 0) edges.push_back({i, j});
        const auto once = transitive_closure(n, edges);
        CHECK(transitive_closure(n, once) == once);
        for (const auto& e : edges) CHECK(std::binary_search(once.begin(), once.end(), e));
    }
}

TEST_CASE("Euler-Maruyama paths depend only on seed and stream", "[properties]") {
    const Landscape land = make_builtin("dual-well");
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const auto a = euler_maruyama(land, 0.4, Vec::Zero(2), 0.01, 200, seed, 3);
        const auto b = euler_maruyama(land, 0.4, Vec::Zero(2), 0.01, 200, seed, 3);
        CHECK(a.points == b.points);
    }
}

TEST_CASE("Hebbian fixed points are symmetric, hollow and on the sphere", "[properties]") {
    std::mt19937_64 rng(21);
    for (int k = 0; k < 15; ++k) {
        const int n = 2 + static_cast<int>(rng() % 5), m = 1 + static_cast<int>(rng() % 4);
        Mat P(m, n);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) P(i, j) = rng() % 2 ? 1.0 : -1.0;
        if (outer_product_rule(P).norm() == 0.0) continue;
        HebbianOptions opt;
        opt.c = 0.5 + static_cast<double>(rng() % 8);
        opt.seed = k;
        const Mat W = hebbian_pgd(P, opt).W;
        CHECK(W == W.transpose());
        CHECK(W.diagonal().isZero());
        CHECK(std::abs(W.norm() - opt.c) < 1e-9);
        CHECK(matrix_cosine(W, outer_product_rule(P)) > 1.0 - 1e-12);
    }
}

TEST_CASE("modern network: fixed points are critical and Jacobians rank-limited", "[properties]") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> nd;
    for (int k = 0; k < 10; ++k) {
        const int d = 2 + static_cast<int>(rng() % 3), M = 2 + static_cast<int>(rng() % 4);
        Mat Xi(d, M);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < M; ++j) Xi(i, j) = nd(rng);
        const ModernHopfield m = make_modern_hopfield(Xi, 0.5 + static_cast<double>(rng() % 10));
        Vec x(d);
        for (int i = 0; i < d; ++i) x[i] = nd(rng);
        CHECK(numeric_rank(mh_jacobian(m, x)) <= M - 1);
        const MhIterationResult r = mh_iterate(m, x);
        if (r.converged) CHECK(mh_energy_gradient(m, r.point).norm() < 1e-8);
    }
}

TEST_CASE("sig12 is idempotent and close", "[properties]") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> e(-30.0, 30.0), u(-1.0, 1.0);
    for (int k = 0; k < 1000; ++k) {
        const double x = u(rng) * std::pow(10.0, e(rng));
        const double r = sig12(x);
        CHECK(sig12(r) == r);
        CHECK(std::abs(r - x) <= 5e-12 * std::abs(x));
    }
}
