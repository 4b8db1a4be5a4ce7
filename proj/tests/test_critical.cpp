#include "morseland/morseland.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace morseland;
using Catch::Matchers::WithinAbs;

namespace {
Vec v2(double a, double b) { return Vec(Eigen::Vector2d(a, b)); }
}  // namespace

TEST_CASE("dual-well census: two minima and one saddle", "[critical]") {
    const Census c = find_critical_points(make_builtin("dual-well"));
    REQUIRE(c.size() == 3);
    // Sorted by index: attractors first.
    CHECK(c[0].kind == PointKind::attractor);
    CHECK(c[1].kind == PointKind::attractor);
    CHECK(c[2].kind == PointKind::saddle);
    CHECK(c[2].index == 1);
    CHECK(c[2].location.norm() < 1e-10);
    // Hessian at the saddle is diag(-2, 2); at the minima diag(4, 2).
    CHECK_THAT(c[2].eigenvalues[0], WithinAbs(-2.0, 1e-9));
    CHECK_THAT(c[2].eigenvalues[1], WithinAbs(2.0, 1e-9));
    CHECK_THAT(c[0].eigenvalues[1], WithinAbs(4.0, 1e-8));
    CHECK(poincare_hopf_check(c).pass);
    CHECK(morse_report(c).morse_ok);
}

TEST_CASE("census in three dimensions keeps the planar structure", "[critical]") {
    const Census c = find_critical_points(make_builtin("dual-well", {}, 3), 12);
    REQUIRE(c.size() == 3);
    CHECK(count_kind(c, PointKind::attractor) == 2);
    CHECK(count_kind(c, PointKind::saddle) == 1);
    CHECK(poincare_hopf_check(c).sum == 1);
}

TEST_CASE("a maximum is a repellor of full index", "[critical]") {
    // V = -(x^2 + y^2)/2 + (x^4 + y^4)/4: repellor at 0, minima at (+-1, +-1), saddles on the axes.
    const Landscape land(make_polynomial_potential(2, {{{2, 0}, -0.5}, {{0, 2}, -0.5}, {{4, 0}, 0.25}, {{0, 4}, 0.25}}),
                         Metric{}, disc(2, 3.0));
    const Census c = find_critical_points(land);
    REQUIRE(c.size() == 9);
    CHECK(count_kind(c, PointKind::attractor) == 4);
    CHECK(count_kind(c, PointKind::saddle) == 4);
    CHECK(count_kind(c, PointKind::repellor) == 1);
    CHECK(c.back().index == 2);
    CHECK(c.back().location.norm() < 1e-10);
    CHECK(poincare_hopf_check(c).sum == 4 - 4 + 1);
}

TEST_CASE("degenerate critical points are flagged", "[critical]") {
    // V = x^4/4 + y^2/2: the origin has a zero Hessian eigenvalue.
    const Landscape land(make_polynomial_potential(2, {{{4, 0}, 0.25}, {{0, 2}, 0.5}}), Metric{}, disc(2, 2.0));
    const CriticalPoint p = classify(land, v2(0, 0));
    CHECK_FALSE(p.hyperbolic);
    const MorseReport r = morse_report({p});
    CHECK_FALSE(r.morse_ok);
    CHECK(r.nonhyperbolic.size() == 1);
}

TEST_CASE("Newton converges quadratically from nearby seeds", "[critical]") {
    const Landscape land = make_builtin("dual-well");
    const NewtonResult r = newton_critical(land, v2(1.3, 0.2));
    CHECK(r.converged);
    CHECK((r.point - v2(std::sqrt(2.0), 0)).norm() < 1e-12);
    CHECK(r.iterations < 10);
}

TEST_CASE("classify refuses non-critical points", "[critical]") {
    CHECK_THROWS_AS(classify(make_builtin("dual-well"), v2(1, 1)), NotCriticalError);
}

TEST_CASE("census options are validated", "[critical]") {
    CHECK_THROWS_AS(find_critical_points(make_builtin("dual-well"), 4), InputError);
}

TEST_CASE("dual-cusp census: three minima, two saddles", "[critical]") {
    const Census c = find_critical_points(make_builtin("dual-cusp"));
    CHECK(c.size() == 5);
    CHECK(count_kind(c, PointKind::attractor) == 3);
    CHECK(count_kind(c, PointKind::saddle) == 2);
    for (const auto& p : c) CHECK(make_builtin("dual-cusp").gradient(p.location).norm() < 1e-10);
}

TEST_CASE("merging removes duplicate roots", "[critical]") {
    const auto m = merge_roots({v2(1, 1), v2(1 + 1e-7, 1), v2(-1, 0)}, 1e-5);
    CHECK(m.size() == 2);
}

TEST_CASE("resonance pairs share a critical value", "[critical]") {
    const Census c = find_critical_points(make_builtin("dual-well"));
    const auto pairs = resonance_check(c, 1e-8);
    REQUIRE(pairs.size() == 1);
    CHECK(c[pairs[0].first].is_attractor());
    CHECK(c[pairs[0].second].is_attractor());
}
