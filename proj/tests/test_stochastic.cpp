#include "morseland/morseland.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

using namespace morseland;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Vec v2(double a, double b) { return Vec(Eigen::Vector2d(a, b)); }

Landscape bowl(double r = 3.0) {
    return Landscape(make_polynomial_potential(2, {{{2, 0}, 0.5}, {{0, 2}, 0.5}}), Metric{}, disc(2, r));
}

}  // namespace

TEST_CASE("streams are reproducible and distinct", "[stochastic]") {
    auto a = make_stream(5, 0), b = make_stream(5, 0), c = make_stream(5, 1), d = make_stream(6, 0);
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
    CHECK(x != d());
}

TEST_CASE("zero noise Euler-Maruyama is the explicit Euler scheme", "[stochastic]") {
    const auto rec = euler_maruyama(bowl(), 0.0, v2(1.0, 2.0), 0.1, 10, 1);
    REQUIRE(rec.size() == 11);
    CHECK((rec.back() - v2(1.0, 2.0) * std::pow(0.9, 10)).norm() < 1e-14);
    CHECK_THAT(rec.times.back(), WithinAbs(1.0, 1e-12));
}

TEST_CASE("same seed, same path; other seed, other path", "[stochastic]") {
    const Landscape land = make_builtin("dual-well");
    const auto a = euler_maruyama(land, 0.3, v2(0, 0), 0.01, 500, 42);
    const auto b = euler_maruyama(land, 0.3, v2(0, 0), 0.01, 500, 42);
    const auto c = euler_maruyama(land, 0.3, v2(0, 0), 0.01, 500, 43);
    CHECK(a.back() == b.back());
    CHECK(a.back() != c.back());
}

TEST_CASE("Euler-Maruyama stays in the domain", "[stochastic]") {
    const auto rec = euler_maruyama(bowl(1.0), 1.0, v2(0.9, 0), 0.01, 2000, 3);
    for (const auto& x : rec.points) CHECK(x.norm() <= 1.0);
}

TEST_CASE("Gibbs measure of a quadratic bowl is Gaussian with variance eps^2", "[stochastic]") {
    const double eps = 0.4;
    const GibbsMeasure gm = gibbs_measure(bowl(), eps, 200);
    const double total = std::accumulate(gm.mass.begin(), gm.mass.end(), 0.0);
    CHECK_THAT(total, WithinAbs(1.0, 1e-12));
    double m2 = 0.0;
    for (std::size_t c = 0; c < gm.mass.size(); ++c)
        if (gm.mass[c] > 0.0) m2 += gm.mass[c] * gm.grid.center(c)[0] * gm.grid.center(c)[0];
    CHECK_THAT(m2, WithinRel(eps * eps, 1e-3));
    // Normalizer: 2 pi eps^2 (truncation at radius 3 is negligible).
    CHECK_THAT(gm.log_Z, WithinAbs(std::log(2.0 * std::numbers::pi * eps * eps), 1e-3));
    CHECK_FALSE(gm.underresolved);
}

TEST_CASE("Gibbs input checks", "[stochastic]") {
    CHECK_THROWS_AS(gibbs_measure(bowl(), 0.0, 100), InputError);
    CHECK_THROWS_AS(gibbs_measure(bowl(), 0.1, 8), InputError);
}

TEST_CASE("symmetric wells share the zero-noise weight", "[stochastic]") {
    const Landscape land = make_builtin("dual-well");
    const Census c = find_critical_points(land);
    const ZeroNoiseReport r = zero_noise_weights(land, c, {0.4, 0.2}, 0.5, 300);
    REQUIRE(r.limit_weights.size() == 2);
    CHECK_THAT(r.limit_weights[0], WithinAbs(r.limit_weights[1], 1e-9));
    // The outside mass shrinks with the noise.
    CHECK(r.outside_mass[1] < r.outside_mass[0]);
    CHECK_THROWS_AS(zero_noise_weights(land, c, {0.2, 0.4}), InputError);
    CHECK_THROWS_AS(zero_noise_weights(land, c, {}), InputError);
}

TEST_CASE("a tilt moves the weight into the lower well", "[stochastic]") {
    const Landscape land = make_builtin("dual-well").tilted(v2(0.1, 0.0));
    const Census c = find_critical_points(land);
    const ZeroNoiseReport r = zero_noise_weights(land, c, {0.3, 0.15}, 0.5, 300);
    REQUIRE(r.attractors.size() == 2);
    const int low = c[r.attractors[0]].value < c[r.attractors[1]].value ? 0 : 1;
    CHECK(r.attractor_masses[1][low] > r.attractor_masses[0][low]);
    CHECK(r.limit_weights[low] > 0.9);
}

TEST_CASE("total variation distance", "[stochastic]") {
    CHECK_THAT(total_variation({0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}), WithinAbs(0.5, 1e-15));
    CHECK_THROWS_AS(total_variation({1.0}, {0.5, 0.5}), InputError);
}

TEST_CASE("occupation measure approaches the Gibbs measure", "[stochastic]") {
    const EmpiricalMeasure em = empirical_invariant_measure(bowl(), 0.5, 0.01, 200000, 1000, 9, 32);
    CHECK(em.samples == 199000);
    CHECK(em.tv_to_gibbs < 0.1);
}

TEST_CASE("action of a straight path under a constant field", "[stochastic]") {
    // V = c.x gives X = -c everywhere; J = |v + c|^2 T / 2 for constant velocity v.
    const Landscape slope(make_polynomial_potential(2, {{{1, 0}, 0.3}, {{0, 1}, -0.2}}), Metric{}, disc(2, 3.0));
    const Vec a = v2(-1, 0), b = v2(1, 1);
    const double T = 2.0;
    const auto path = straight_path(slope, a, b, T, 400);
    const Vec v = (b - a) / T;
    const Vec c = v2(0.3, -0.2);
    CHECK_THAT(fw_action(slope, path), WithinRel(0.5 * (v + c).squaredNorm() * T, 1e-12));
}

TEST_CASE("noise-free paths have zero action", "[stochastic]") {
    const Landscape land = make_builtin("dual-well");
    const auto rec = euler_maruyama(land, 0.0, v2(0.5, 0.5), 0.001, 1000, 0);
    CHECK(fw_action(land, rec) < 1e-20);
}

TEST_CASE("noisy path action scales like eps^2", "[stochastic]") {
    // E[J] = eps^2 n d for n Euler-Maruyama steps in d dimensions.
    const Landscape land = make_builtin("dual-well");
    const auto rec = euler_maruyama(land, 0.1, v2(0.5, 0.5), 0.001, 20000, 5);
    CHECK_THAT(fw_action(land, rec), WithinRel(0.01 * 20000 * 2, 0.05));
}

TEST_CASE("action input checks", "[stochastic]") {
    TrajectoryRecord one;
    one.push(0, v2(0, 0), 0);
    CHECK_THROWS_AS(fw_action(bowl(), one), InputError);
    TrajectoryRecord uneven = one;
    uneven.push(0.1, v2(0, 0), 0);
    uneven.push(0.3, v2(0, 0), 0);
    CHECK_THROWS_AS(fw_action(bowl(), uneven), InputError);
}
