#include "morseland/morseland.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace morseland;
using Catch::Matchers::WithinAbs;

namespace {

Vec v2(double a, double b) { return Vec(Eigen::Vector2d(a, b)); }

Mat swap2() { return (Mat(2, 2) << 0, 1, 1, 0).finished(); }

}  // namespace

TEST_CASE("network validation", "[hopfield]") {
    CHECK_THROWS_AS(make_hopfield((Mat(2, 2) << 0, 1, 0.5, 0).finished(), 1.0), ConfigError);
    CHECK_THROWS_AS(make_hopfield((Mat(2, 2) << 1, 1, 1, 0).finished(), 1.0), ConfigError);
    CHECK_THROWS_AS(make_hopfield(swap2(), -1.0), ConfigError);
    CHECK_THROWS_AS(make_hopfield(swap2(), Vec::Ones(3)), ConfigError);
    const HopfieldNet net = make_hopfield(swap2(), 0.5);
    CHECK(net.B.isZero());
    CHECK(net.Rinv.size() == 2);
}

TEST_CASE("energy, gradient and Hessian of a two-neuron net", "[hopfield]") {
    const HopfieldNet net = make_hopfield(swap2(), 0.5);
    const Vec v = v2(0.5, -0.25);
    auto I = [](double x) { return x * std::atanh(x) + 0.5 * std::log(1.0 - x * x); };
    CHECK_THAT(hopfield_energy(net, v), WithinAbs(0.125 + 0.5 * (I(0.5) + I(-0.25)), 1e-14));
    const Vec g = hopfield_energy_gradient(net, v);
    CHECK_THAT(g[0], WithinAbs(0.25 + 0.5 * std::atanh(0.5), 1e-14));
    CHECK_THAT(g[1], WithinAbs(-0.5 + 0.5 * std::atanh(-0.25), 1e-14));
    const Mat H = hopfield_energy_hessian(net, v);
    CHECK_THAT(H(0, 1), WithinAbs(-1.0, 1e-15));
    CHECK_THAT(H(0, 0), WithinAbs(0.5 / 0.75, 1e-14));
    CHECK_THROWS_AS(hopfield_energy(net, v2(1.0, 0.0)), DomainError);
}

TEST_CASE("hidden and feature dynamics agree on fixed points", "[hopfield]") {
    const HopfieldNet net = make_hopfield(swap2(), 0.5);
    const RecallResult r = recall(net, v2(0.3, 0.2));
    const Vec v = r.point;
    CHECK(feature_drift(net, v).norm() < 1e-8);
    Vec u(2);
    for (int i = 0; i < 2; ++i) u[i] = std::atanh(v[i]);
    CHECK(hidden_drift(net, u).norm() < 1e-7);
    // Symmetric fixed point v1 = v2 = v with v = tanh(2v).
    CHECK_THAT(v[0], WithinAbs(v[1], 1e-8));
    CHECK_THAT(v[0], WithinAbs(std::tanh(2.0 * v[0]), 1e-8));
}

TEST_CASE("outer product rule", "[hopfield]") {
    const Mat P = (Mat(2, 3) << 1, -1, 1, 1, 1, -1).finished();
    const Mat W = outer_product_rule(P);
    CHECK(W.diagonal().isZero());
    CHECK_THAT(W(0, 1), WithinAbs(0.0, 1e-15));
    CHECK_THAT(W(0, 2), WithinAbs(0.0, 1e-15));
    CHECK_THAT(W(1, 2), WithinAbs(-1.0, 1e-15));
}

TEST_CASE("projected Hebbian learning converges to c times the normalised rule", "[hopfield]") {
    const Mat P = (Mat(2, 3) << 1, 1, -1, 1, -1, 1).finished();
    HebbianOptions opt;
    opt.c = 2.0;
    const HebbianResult r = hebbian_pgd(P, opt);
    const Mat target = opt.c * outer_product_rule(P) / outer_product_rule(P).norm();
    CHECK((r.W - target).norm() < 1e-9);
    CHECK(r.W == r.W.transpose());
    CHECK(r.W.diagonal().isZero());
    opt.c = 4.0;
    CHECK((hebbian_pgd(P, opt).W - 2.0 * r.W).norm() < 1e-9);
}

TEST_CASE("Hebbian input checks", "[hopfield]") {
    CHECK_THROWS_AS(hebbian_pgd(Mat(0, 3)), InputError);
    HebbianOptions bad;
    bad.rate = 0.0;
    CHECK_THROWS_AS(hebbian_pgd(Mat::Ones(1, 2), bad), InputError);
}

TEST_CASE("weight rank test", "[hopfield]") {
    const Mat rank1 = (Mat(3, 3) << 0, 1, 1, 1, 0, 1, 1, 1, 0).finished() + Mat::Identity(3, 3);
    CHECK_FALSE(weight_rank_check(Mat::Ones(3, 3)).structurally_stable);
    CHECK(weight_rank_check(rank1 - 2.5 * Mat::Identity(3, 3)).structurally_stable);
    CHECK_THAT(weight_rank_check(swap2()).min_abs_eigenvalue, WithinAbs(1.0, 1e-14));
}

TEST_CASE("stability of a resistive net", "[hopfield]") {
    const StabilityReport ok = stability_check(make_hopfield(swap2(), 0.5));
    CHECK(ok.structurally_stable);
    // The origin (Hessian -W + 0.5 I) and the two symmetric minima.
    CHECK(ok.fixed_points.size() == 3);
    // With Rinv = 1 the origin Hessian is I - W, singular: a pitchfork.
    const StabilityReport crit = stability_check(make_hopfield(swap2(), 1.0));
    CHECK_FALSE(crit.structurally_stable);
}

TEST_CASE("eigenvalue clamping", "[hopfield]") {
    const Mat W = (Mat(2, 2) << 0, 2, 2, 0).finished();
    const ClampResult c = clamp_eigenvalues(W, 0.5);
    Eigen::SelfAdjointEigenSolver<Mat> es(c.W);
    CHECK_THAT(es.eigenvalues()[0], WithinAbs(0.5, 1e-12));
    CHECK_THAT(es.eigenvalues()[1], WithinAbs(2.0, 1e-12));
    CHECK_THAT(c.distance, WithinAbs(2.5, 1e-12));
}

TEST_CASE("sign patterns and clipping", "[hopfield]") {
    CHECK(sign_pattern(v2(0.2, -0.1)) == v2(1, -1));
    const HopfieldNet net = make_hopfield(swap2(), 0.5);
    const Vec c = clip_to_range(net, v2(1.5, -3.0));
    CHECK(c == v2(1.0 - 1e-3, -1.0 + 1e-3));
}

TEST_CASE("modern network update and energy", "[hopfield]") {
    const ModernHopfield m = make_modern_hopfield(builtin::triangle_patterns(), 2.0);
    const Vec p = mh_probabilities(m, v2(0.1, 0.2));
    CHECK_THAT(p.sum(), WithinAbs(1.0, 1e-15));
    // Gradient of the energy against central differences.
    const Vec x = v2(0.3, -0.4);
    const Vec g = mh_energy_gradient(m, x);
    for (int i = 0; i < 2; ++i) {
        Vec a = x, b = x;
        a[i] += 1e-6;
        b[i] -= 1e-6;
        CHECK_THAT((mh_energy(m, a) - mh_energy(m, b)) / 2e-6, WithinAbs(g[i], 1e-8));
    }
    // Jacobian is beta times the pattern covariance under p.
    const Mat J = mh_jacobian(m, x);
    const Vec q = mh_probabilities(m, x);
    const Mat C = m.Xi * q.asDiagonal() * m.Xi.transpose() - (m.Xi * q) * (m.Xi * q).transpose();
    CHECK((J - m.beta * C).norm() < 1e-12);
    CHECK_THROWS_AS(make_modern_hopfield(builtin::triangle_patterns(), 0.0), ConfigError);
}

TEST_CASE("modern census: one attractor at small beta, one per pattern at large beta", "[hopfield]") {
    const ModernHopfield m = make_modern_hopfield(builtin::triangle_patterns(), 1.0);
    const auto c = mh_attractor_census(m, {1.0, 30.0}, mh_default_seeds(m, 100));
    REQUIRE(c.size() == 2);
    CHECK(c[0].attractors.size() == 1);
    // At beta = 1 the fixed point is near the softmax-weighted mean.
    CHECK((c[0].attractors[0] - mh_update(make_modern_hopfield(m.Xi, 1.0), c[0].attractors[0])).norm() < 1e-9);
    REQUIRE(c[1].attractors.size() == 3);
    for (const auto& a : c[1].attractors) {
        double best = 1e9;
        for (int j = 0; j < 3; ++j) best = std::min(best, (a - m.Xi.col(j)).norm());
        CHECK(best < 0.05);
    }
}

TEST_CASE("rank conditions", "[hopfield]") {
    CHECK(numeric_rank(Mat::Identity(3, 3)) == 3);
    CHECK(numeric_rank(Mat::Ones(3, 3)) == 1);
    CHECK_FALSE(mh_rank_check(make_modern_hopfield(Mat::Identity(2, 2), 1.0)).necessary_ok);
    CHECK(mh_rank_check(make_modern_hopfield(builtin::triangle_patterns(), 1.0)).necessary_ok);
    // The Jacobian never exceeds rank M - 1 since p sums to one.
    const ModernHopfield m = make_modern_hopfield(builtin::triangle_patterns(), 5.0);
    for (double a : {-1.0, 0.0, 0.7})
        for (double b : {-0.5, 0.5}) CHECK(numeric_rank(mh_jacobian(m, v2(a, b))) <= 2);
}

TEST_CASE("Hopfield landscapes from flattened parameters", "[hopfield]") {
    const Landscape land = make_builtin("hopfield-energy", {2, 0, 0, 1, 1, 0, 0, 0, 0.5, 0.5});
    const HopfieldNet net = make_hopfield(swap2(), 0.5);
    const Vec v = v2(0.2, 0.6);
    CHECK_THAT(land.value(v), WithinAbs(hopfield_energy(net, v), 1e-14));
    CHECK_THROWS_AS(make_builtin("hopfield-energy", {2, 0, 0, 1}), ConfigError);
}
