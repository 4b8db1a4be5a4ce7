#ifndef MORSELAND_FLOW_HPP
#define MORSELAND_FLOW_HPP

#include "morseland/landscape.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace morseland {

struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<Vec> points;
    std::vector<double> energies;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    const Vec& back() const { return points.back(); }

    void push(double t, const Vec& x, double e) {
        times.push_back(t);
        points.push_back(x);
        energies.push_back(e);
    }
};

enum class Direction { forward, backward };

struct FlowOptions {
    double dt = 0.01;
    double t_max = 1e4;
    double drift_tol = 1e-10;
    double energy_tol = 1e-9;
    Direction direction = Direction::forward;
    // Steps below min_dt_ratio * dt that still misbehave end the integration.
    double min_dt_ratio = 1e-9;
    // A step that keeps leaving the domain below exit_dt_ratio * dt is a real exit.
    double exit_dt_ratio = 1e-3;
};

enum class FlowStatus { converged, time_limit };

struct FlowResult {
    Vec point;
    double time = 0.0;
    double energy = 0.0;
    FlowStatus status = FlowStatus::time_limit;
    std::size_t steps = 0;
};

namespace detail {

inline Vec signed_drift(const Landscape& land, const Vec& x, double sign) { return sign * land.drift_unchecked(x); }

inline bool finite(const Vec& x) { return x.allFinite(); }

}  // namespace detail

/// RK4 on X (or -X when integrating backward). A step is retried with half
/// the step size while it would raise the energy by more than energy_tol
/// (lower it, backward) or land outside the domain; after an accepted step
/// the size grows back toward the nominal dt. `observer(t, x, energy)` sees
/// every accepted point and may return false to stop early.
template <class Observer>
FlowResult integrate_with(const Landscape& land, const Vec& x0, const FlowOptions& opt, Observer&& observer) {
    if (!(opt.dt > 0.0)) throw InputError("dt must be positive");
    if (!land.contains(x0)) throw DomainError("start point " + format_point(x0) + " outside domain");
    const double sign = opt.direction == Direction::forward ? 1.0 : -1.0;

    FlowResult r;
    Vec x = x0;
    double t = 0.0;
    double e = land.value_unchecked(x);
    double h = opt.dt;
    const double h_min = opt.dt * opt.min_dt_ratio;

    if (!observer(t, x, e)) {
        r.point = x;
        r.energy = e;
        return r;
    }

    Vec k1 = detail::signed_drift(land, x, sign);
    for (;;) {
        if (k1.norm() < opt.drift_tol) {
            r.status = FlowStatus::converged;
            break;
        }
        // Accumulated t can fall short of t_max by less than any usable step.
        if (t >= opt.t_max - h_min) break;
        const double step_cap = std::min(h, opt.t_max - t);
        double hs = step_cap;
        Vec xn;
        double en = 0.0;
        bool accepted = false;
        Vec exit_point;
        while (hs >= h_min) {
            Vec k2 = detail::signed_drift(land, x + 0.5 * hs * k1, sign);
            Vec k3 = detail::signed_drift(land, x + 0.5 * hs * k2, sign);
            Vec k4 = detail::signed_drift(land, x + hs * k3, sign);
            xn = x + (hs / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (!detail::finite(xn)) {
                hs *= 0.5;
                continue;
            }
            if (!land.contains(xn)) {
                exit_point = xn;
                if (hs < opt.dt * opt.exit_dt_ratio) break;
                hs *= 0.5;
                continue;
            }
            en = land.value_unchecked(xn);
            if (sign * (en - e) > opt.energy_tol) {
                hs *= 0.5;
                continue;
            }
            accepted = true;
            break;
        }
        if (!accepted) {
            if (exit_point.size())
                throw IntegrationError("trajectory left the domain at " + format_point(exit_point), exit_point);
            throw NumericError("step size underflow near " + format_point(x));
        }
        x = std::move(xn);
        e = en;
        t += hs;
        ++r.steps;
        h = std::min(opt.dt, hs * 2.0);
        if (!observer(t, x, e)) break;
        k1 = detail::signed_drift(land, x, sign);
    }
    r.point = x;
    r.time = t;
    r.energy = e;
    return r;
}

inline TrajectoryRecord integrate(const Landscape& land, const Vec& x0, double dt, double t_max,
                                  Direction direction = Direction::forward) {
    FlowOptions opt;
    opt.dt = dt;
    opt.t_max = t_max;
    opt.direction = direction;
    TrajectoryRecord rec;
    integrate_with(land, x0, opt, [&](double t, const Vec& x, double e) {
        rec.push(t, x, e);
        return true;
    });
    return rec;
}

/// Terminal point of the flow from x0. Throws TimeoutError if the drift has
/// not fallen below the tolerance by t_max.
inline Vec omega_limit(const Landscape& land, const Vec& x0, double dt = 0.01, double t_max = 1e4,
                       Direction direction = Direction::forward) {
    FlowOptions opt;
    opt.dt = dt;
    opt.t_max = t_max;
    opt.direction = direction;
    FlowResult r = integrate_with(land, x0, opt, [](double, const Vec&, double) { return true; });
    if (r.status != FlowStatus::converged)
        throw TimeoutError("flow from " + format_point(x0) + " did not converge by t=" + std::to_string(t_max));
    return r.point;
}

/// Time average of f along the forward flow over [0, T] (trapezoid rule).
template <class F>
double time_average(const Landscape& land, const Vec& x0, double T, F&& f, double dt = 0.01) {
    FlowOptions opt;
    opt.dt = dt;
    opt.t_max = T;
    opt.drift_tol = 0.0;
    double acc = 0.0, t_prev = 0.0, f_prev = 0.0;
    bool first = true;
    FlowResult r = integrate_with(land, x0, opt, [&](double t, const Vec& x, double) {
        double fx = f(x);
        if (!first) acc += 0.5 * (fx + f_prev) * (t - t_prev);
        first = false;
        t_prev = t;
        f_prev = fx;
        return true;
    });
    // A flow that sits exactly at a rest point stops advancing; the rest of
    // the window is spent there.
    if (r.time < T) acc += f_prev * (T - r.time);
    return acc / T;
}

// ---------------------------------------------------------------------------
// Boundary transversality
// ---------------------------------------------------------------------------

struct TransversalityReport {
    double min_inward_product = std::numeric_limits<double>::infinity();
    Vec worst_point;
    std::size_t samples = 0;
    bool pass = false;
};

/// Points on the domain boundary together with their outward unit normals.
inline std::vector<std::pair<Vec, Vec>> boundary_samples(const Domain& dom, std::size_t samples) {
    std::vector<std::pair<Vec, Vec>> out;
    const int n = dom.dimension;
    if (dom.shape == DomainShape::disc) {
        for (std::size_t k = 0; k < samples; ++k) {
            Vec u(n);
            if (n == 1) {
                u[0] = (k % 2 == 0) ? 1.0 : -1.0;
            } else if (n == 2) {
                const double th = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(samples);
                u << std::cos(th), std::sin(th);
            } else {
                // Quasi-random direction from a Halton point in the cube.
                u = (2.0 * halton(k, n).array() - 1.0).matrix();
                if (u.norm() < 1e-12) u = Vec::Unit(n, static_cast<int>(k % n));
                u.normalize();
            }
            out.emplace_back(dom.radius * u, u);
        }
        return out;
    }
    // Box: spread samples over the 2n faces.
    auto [lo, hi] = dom.bounds();
    const std::size_t faces = 2 * static_cast<std::size_t>(n);
    for (std::size_t k = 0; k < samples; ++k) {
        const std::size_t face = k % faces;
        const int axis = static_cast<int>(face / 2);
        const bool upper = face % 2 == 1;
        Vec h = halton(k / faces, n);
        Vec x = (lo + (hi - lo) * h.array()).matrix();
        x[axis] = upper ? hi : lo;
        Vec normal = Vec::Zero(n);
        normal[axis] = upper ? 1.0 : -1.0;
        out.emplace_back(x, normal);
    }
    return out;
}

/// Minimum of <X(x), -normal> over boundary samples; pass iff strictly positive.
inline TransversalityReport boundary_transversality(const Landscape& land, std::size_t samples = 256) {
    if (samples < 64) throw InputError("boundary_transversality needs at least 64 samples");
    TransversalityReport rep;
    rep.samples = samples;
    for (const auto& [x, normal] : boundary_samples(land.domain(), samples)) {
        double p = land.drift_unchecked(x).dot(-normal);
        if (p < rep.min_inward_product) {
            rep.min_inward_product = p;
            rep.worst_point = x;
        }
    }
    rep.pass = rep.min_inward_product > 0.0;
    return rep;
}

}  // namespace morseland

#endif
