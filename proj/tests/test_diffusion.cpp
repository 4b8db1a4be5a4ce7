#include "morseland/morseland.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace morseland;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Vec v2(double a, double b) { return Vec(Eigen::Vector2d(a, b)); }

const NoiseSchedule vp = make_schedule(ScheduleKind::vp, 0.1, 20.0);

}  // namespace

TEST_CASE("VP marginal parameters", "[diffusion]") {
    // int_0^t beta = 0.1 t + 9.95 t^2.
    const MarginalParams p = marginal_params(vp, 0.5);
    const double B = 0.05 + 9.95 * 0.25;
    CHECK_THAT(p.mean_scale, WithinRel(std::exp(-0.5 * B), 1e-14));
    CHECK_THAT(p.added_variance, WithinRel(1.0 - std::exp(-B), 1e-14));
    // Variance preserving: unit data variance stays unit.
    CHECK_THAT(p.mean_scale * p.mean_scale + p.added_variance, WithinAbs(1.0, 1e-14));
    CHECK_THROWS_AS(marginal_params(vp, 1.5), DomainError);
}

TEST_CASE("subVP and VE marginal parameters", "[diffusion]") {
    const NoiseSchedule sub = make_schedule(ScheduleKind::subvp, 0.1, 20.0);
    const double B = 0.1 + 9.95;
    CHECK_THAT(marginal_params(sub, 1.0).added_variance, WithinRel(std::pow(1.0 - std::exp(-B), 2), 1e-14));
    const NoiseSchedule ve = make_schedule(ScheduleKind::ve, 0.01, 10.0);
    const MarginalParams p = marginal_params(ve, 1.0);
    CHECK(p.mean_scale == 1.0);
    CHECK_THAT(p.added_variance, WithinRel(100.0 - 1e-4, 1e-14));
    CHECK_THAT(ve.noise(0.3), WithinRel(2.0 * std::pow(ve.ve_sigma(0.3), 2) * std::log(1000.0), 1e-14));
    CHECK_THROWS_AS(make_schedule(ScheduleKind::ve, 1.0, 0.5), ConfigError);
    CHECK_THROWS_AS(make_schedule(ScheduleKind::vp, 0.0, 1.0), ConfigError);
}

TEST_CASE("single-component score is linear", "[diffusion]") {
    const GmmData d = make_gmm({v2(1.0, -0.5)}, 0.2);
    const double t = 0.3;
    const MarginalParams mp = marginal_params(vp, t);
    const double var = 0.04 * mp.mean_scale * mp.mean_scale + mp.added_variance;
    const Vec x = v2(0.2, 0.9);
    const LogMarginal lm = log_marginal_and_score(d, vp, t, x);
    CHECK((lm.score - (mp.mean_scale * v2(1.0, -0.5) - x) / var).norm() < 1e-13);
    const double r2 = (x - mp.mean_scale * v2(1.0, -0.5)).squaredNorm();
    CHECK_THAT(lm.log_p, WithinAbs(-0.5 * r2 / var - std::log(2 * std::numbers::pi * var), 1e-13));
    CHECK((log_marginal_hessian(d, vp, t, x) + Mat::Identity(2, 2) / var).norm() < 1e-12);
}

TEST_CASE("mixture score matches finite differences of log p", "[diffusion]") {
    const GmmData d = builtin::four_centroids();
    for (double t : {0.05, 0.3, 0.9}) {
        const Vec x = v2(0.4, -0.7);
        const Vec s = log_marginal_and_score(d, vp, t, x).score;
        for (int i = 0; i < 2; ++i) {
            Vec a = x, b = x;
            a[i] += 1e-6;
            b[i] -= 1e-6;
            const double fd = (log_marginal_and_score(d, vp, t, a).log_p - log_marginal_and_score(d, vp, t, b).log_p) / 2e-6;
            CHECK_THAT(fd, WithinAbs(s[i], 1e-6 * std::max(1.0, std::abs(s[i]))));
        }
    }
}

TEST_CASE("generation landscape is minus the time potential", "[diffusion]") {
    const GmmData d = builtin::four_centroids();
    const Landscape land = generation_landscape(d, vp, 0.4);
    const Vec x = v2(0.3, 0.1);
    CHECK_THAT(land.value(x), WithinAbs(-time_potential(d, vp, 0.4, x), 1e-14));
    CHECK((land.drift(x) - time_potential_gradient(d, vp, 0.4, x)).norm() < 1e-14);
    CHECK((probability_flow_drift(d, vp, 0.4, x) + time_potential_gradient(d, vp, 0.4, x)).norm() < 1e-14);
    CHECK(land.domain().radius == 3.0);
}

TEST_CASE("near the data the generation landscape has one attractor per mode", "[diffusion]") {
    const Census c = find_critical_points(generation_landscape(builtin::four_centroids(), vp, 0.01));
    CHECK(count_kind(c, PointKind::attractor) == 4);
    for (const auto& p : c)
        if (p.is_attractor()) CHECK(std::abs(std::abs(p.location[0]) - 1.0) < 0.05);
}

TEST_CASE("mixture validation and parameter encoding", "[diffusion]") {
    CHECK_THROWS_AS(make_gmm({}, 0.1), ConfigError);
    CHECK_THROWS_AS(make_gmm({v2(0, 0)}, 0.0), ConfigError);
    CHECK_THROWS_AS(make_gmm({v2(0, 0), v2(1, 1)}, 0.1, v2(0.3, 0.3)), ConfigError);
    const Landscape a = generation_landscape(builtin::four_centroids(), vp, 0.3);
    const GmmSpec spec = gmm_from_params(2, a.potential().params);
    CHECK(spec.t == 0.3);
    CHECK(spec.data.components() == 4);
    const Landscape b = generation_landscape(spec.data, spec.schedule, spec.t);
    CHECK(a.value(v2(0.1, 0.2)) == b.value(v2(0.1, 0.2)));
    CHECK_THROWS_AS(gmm_from_params(2, {0.3, 0, 0.1, 20, 0.1, 2, 0.5, 0.5, 1, 1}), ConfigError);
}

TEST_CASE("exact marginal draws have the analytic moments", "[diffusion]") {
    const GmmData d = builtin::four_centroids();
    const auto xs = marginal_samples(d, vp, 0.2, 20000, 11);
    Vec mean, var;
    analytic_moments(d, vp, 0.2, mean, var);
    Vec m = Vec::Zero(2), q = Vec::Zero(2);
    for (const auto& x : xs) m += x;
    m /= 20000.0;
    for (const auto& x : xs) q += (x - m).cwiseAbs2();
    q /= 19999.0;
    for (int i = 0; i < 2; ++i) {
        CHECK(std::abs(m[i] - mean[i]) < 0.03);
        CHECK_THAT(q[i], WithinRel(var[i], 0.03));
    }
}

TEST_CASE("forward SDE reaches the VP prior", "[diffusion]") {
    const auto xs = forward_terminal_samples(vp, v2(1.0, 1.0), 1.0, 4000, 500, 5);
    Vec m = Vec::Zero(2);
    double q = 0.0;
    for (const auto& x : xs) {
        m += x;
        q += x.squaredNorm();
    }
    m /= 4000.0;
    CHECK(m.norm() < 0.06);
    CHECK_THAT(q / 4000.0, WithinRel(2.0, 0.06));
}

TEST_CASE("probability flow transports marginals", "[diffusion]") {
    const MomentCheck mc = probability_flow_marginal_check(builtin::four_centroids(), vp, 0.5, 10000, 100, 3);
    CHECK(mc.pass);
    // Forward then back again returns the start point.
    const Vec x0 = v2(0.3, -1.2);
    const Vec y = probability_flow_transport(builtin::four_centroids(), vp, x0, 0.2, 0.6, 400);
    const Vec z = probability_flow_transport(builtin::four_centroids(), vp, y, 0.6, 0.2, 400);
    CHECK((z - x0).norm() < 1e-6);
}

TEST_CASE("reverse SDE samples cluster at the centroids", "[diffusion]") {
    const GmmData d = builtin::four_centroids();
    const auto xs = reverse_sde_sample(d, vp, 2000, 500, 7);
    const ClusterSummary cs = cluster_by_centroid(d, xs);
    CHECK(cs.max_mean_error < 0.05);
    CHECK(cs.min_occupancy > 0.2);
    CHECK(reverse_sde_sample(d, vp, 3, 50, 7)[2] == reverse_sde_sample(d, vp, 3, 50, 7)[2]);
}

TEST_CASE("cluster summary of the centroids themselves", "[diffusion]") {
    const GmmData d = builtin::four_centroids();
    const ClusterSummary cs = cluster_by_centroid(d, d.centroids);
    CHECK(cs.max_mean_error == 0.0);
    CHECK(cs.min_occupancy == 0.25);
}

TEST_CASE("cascade input checks", "[diffusion]") {
    CHECK_THROWS_AS(diffusion_cascade(builtin::four_centroids(), vp, 2), InputError);
}
