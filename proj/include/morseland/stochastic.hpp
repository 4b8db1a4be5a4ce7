#ifndef MORSELAND_STOCHASTIC_HPP
#define MORSELAND_STOCHASTIC_HPP

#include "morseland/critical.hpp"
#include "morseland/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

namespace morseland {

// ---------------------------------------------------------------------------
// Seeded streams
// ---------------------------------------------------------------------------

/// Generator for one (seed, stream) pair. Streams with different ids are
/// independent, so ensembles give the same numbers under any schedule.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), 0x6d6f7273u};
    return std::mt19937_64(seq);
}

// ---------------------------------------------------------------------------
// Euler-Maruyama
// ---------------------------------------------------------------------------

struct EmOptions {
    int max_redraws = 100;
};

/// x_{k+1} = x_k + X(x_k) dt + eps sqrt(2 dt) xi_k. With this scaling the
/// stationary density of the Euclidean diffusion is proportional to
/// exp(-V / eps^2), the Gibbs law below. Increments that would leave the
/// domain are redrawn. `observer(k, x)` sees every point, k = 0..steps.
template <class Observer>
Vec euler_maruyama_with(const Landscape& land, double eps, const Vec& x0, double dt, std::size_t steps,
                        std::uint64_t seed, std::uint64_t stream, Observer&& observer, const EmOptions& opt = {}) {
    if (eps < 0.0) throw InputError("eps must be nonnegative");
    if (!(dt > 0.0)) throw InputError("dt must be positive");
    if (!land.contains(x0)) throw DomainError("start point " + format_point(x0) + " outside domain");
    auto rng = make_stream(seed, stream);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double scale = eps * std::sqrt(2.0 * dt);
    const auto n = x0.size();
    Vec x = x0, xi(n), base(n), xn(n);
    observer(std::size_t{0}, x);
    for (std::size_t k = 1; k <= steps; ++k) {
        base = x + dt * land.drift_unchecked(x);
        bool ok = false;
        for (int attempt = 0; attempt <= opt.max_redraws; ++attempt) {
            for (Eigen::Index i = 0; i < n; ++i) xi[i] = normal(rng);
            xn = base + scale * xi;
            if (land.contains(xn)) {
                ok = true;
                break;
            }
            if (scale == 0.0) break;
        }
        if (!ok)
            throw ConfinementError("Euler-Maruyama step from " + format_point(x) + " kept leaving the domain");
        x.swap(xn);
        observer(k, x);
    }
    return x;
}

inline TrajectoryRecord euler_maruyama(const Landscape& land, double eps, const Vec& x0, double dt, std::size_t steps,
                                       std::uint64_t seed, std::uint64_t stream = 0) {
    TrajectoryRecord rec;
    rec.times.reserve(steps + 1);
    rec.points.reserve(steps + 1);
    rec.energies.reserve(steps + 1);
    euler_maruyama_with(land, eps, x0, dt, steps, seed, stream, [&](std::size_t k, const Vec& x) {
        rec.push(static_cast<double>(k) * dt, x, land.value_unchecked(x));
    });
    return rec;
}

// ---------------------------------------------------------------------------
// Grids and Gibbs measures
// ---------------------------------------------------------------------------

/// Tensor-product midpoint grid over the domain's bounding box.
struct Grid {
    int dimension = 0;
    int n = 0;  // cells per axis
    double lo = 0.0, hi = 0.0;

    double h() const { return (hi - lo) / n; }
    std::size_t cells() const {
        std::size_t c = 1;
        for (int i = 0; i < dimension; ++i) c *= static_cast<std::size_t>(n);
        return c;
    }
    double cell_volume() const { return std::pow(h(), dimension); }

    Vec center(std::size_t flat) const {
        Vec x(dimension);
        for (int i = 0; i < dimension; ++i) {
            x[i] = lo + (static_cast<double>(flat % n) + 0.5) * h();
            flat /= n;
        }
        return x;
    }

    /// Flat cell index of x (first axis fastest), clamped to the grid.
    std::size_t locate(const Vec& x) const {
        std::size_t flat = 0, stride = 1;
        for (int i = 0; i < dimension; ++i) {
            int k = static_cast<int>(std::floor((x[i] - lo) / h()));
            k = std::clamp(k, 0, n - 1);
            flat += stride * static_cast<std::size_t>(k);
            stride *= static_cast<std::size_t>(n);
        }
        return flat;
    }
};

inline Grid domain_grid(const Domain& dom, int grid_n) {
    auto [lo, hi] = dom.bounds();
    Grid g;
    g.dimension = dom.dimension;
    g.n = grid_n;
    g.lo = lo;
    g.hi = hi;
    if (static_cast<double>(g.cells()) > 1e8 || std::pow(static_cast<double>(grid_n), dom.dimension) > 1e8)
        throw InputError("quadrature grid too large for this dimension");
    return g;
}

struct GibbsMeasure {
    double epsilon = 0.0;
    Grid grid;
    std::vector<char> inside;         // cell centre inside the domain
    std::vector<double> log_density;  // log of the normalized density (-inf outside)
    std::vector<double> mass;         // density * cell volume
    double log_Z = 0.0;
    bool underresolved = false;

    double density(std::size_t c) const { return std::exp(log_density[c]); }

    /// Total mass of cells whose centres satisfy pred.
    template <class Pred>
    double mass_where(Pred&& pred) const {
        double s = 0.0;
        for (std::size_t c = 0; c < mass.size(); ++c)
            if (mass[c] > 0.0 && pred(grid.center(c))) s += mass[c];
        return s;
    }
};

namespace detail {
inline double log_sum_exp(const std::vector<double>& v) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : v) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}
}  // namespace detail

/// Density proportional to exp(-V/eps^2) sqrt(det g) on the domain, by
/// midpoint quadrature with grid_n cells per axis.
inline GibbsMeasure gibbs_measure(const Landscape& land, double eps, int grid_n) {
    if (!(eps > 0.0)) throw InputError("gibbs_measure needs eps > 0");
    if (grid_n < 32) throw InputError("gibbs_measure needs grid_n >= 32");
    GibbsMeasure gm;
    gm.epsilon = eps;
    gm.grid = domain_grid(land.domain(), grid_n);
    const std::size_t cells = gm.grid.cells();
    gm.inside.assign(cells, 0);
    std::vector<double> logw(cells, -std::numeric_limits<double>::infinity());
    const double inv_e2 = 1.0 / (eps * eps);
    const bool euclid = land.metric().is_euclidean();
    parallel_for(cells, [&](std::size_t c) {
        Vec x = gm.grid.center(c);
        if (!land.contains(x)) return;
        gm.inside[c] = 1;
        double lw = -land.value_unchecked(x) * inv_e2;
        if (!euclid) lw += 0.5 * std::log(land.metric().matrix(x).determinant());
        logw[c] = lw;
    });
    const double log_vol = std::log(gm.grid.cell_volume());
    gm.log_Z = detail::log_sum_exp(logw) + log_vol;
    gm.log_density.resize(cells);
    gm.mass.resize(cells);
    for (std::size_t c = 0; c < cells; ++c) {
        gm.log_density[c] = logw[c] - gm.log_Z;
        gm.mass[c] = gm.inside[c] ? std::exp(gm.log_density[c] + log_vol) : 0.0;
    }
    // Resolution: number of cells needed to hold 99% of the mass.
    std::vector<double> sorted = gm.mass;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double acc = 0.0;
    std::size_t needed = 0;
    for (double m : sorted) {
        acc += m;
        ++needed;
        if (acc >= 0.99) break;
    }
    gm.underresolved = needed < 4;
    return gm;
}

// ---------------------------------------------------------------------------
// Zero-noise concentration
// ---------------------------------------------------------------------------

struct ZeroNoiseReport {
    std::vector<double> epsilons;
    std::vector<int> attractors;  // census positions
    std::vector<std::vector<double>> attractor_masses;  // [eps][attractor]
    std::vector<double> outside_mass;                   // mass off all balls, per eps
    std::vector<double> limit_weights;
    std::vector<std::pair<std::size_t, std::size_t>> resonant_pairs;
};

inline ZeroNoiseReport zero_noise_weights(const Landscape& land, const Census& census,
                                          const std::vector<double>& epsilons, double ball_radius = 0.5,
                                          int grid_n = 400) {
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        if (!(epsilons[i] > 0.0)) throw InputError("epsilons must be positive");
        if (i && !(epsilons[i] < epsilons[i - 1])) throw InputError("epsilons must be decreasing");
    }
    if (epsilons.empty()) throw InputError("epsilons must not be empty");
    ZeroNoiseReport rep;
    rep.epsilons = epsilons;
    for (std::size_t i = 0; i < census.size(); ++i)
        if (census[i].is_attractor()) rep.attractors.push_back(static_cast<int>(i));
    rep.resonant_pairs = resonance_check(census, 1e-8);
    for (std::size_t e = 0; e < epsilons.size(); ++e) {
        GibbsMeasure gm = gibbs_measure(land, epsilons[e], grid_n);
        if (e + 1 == epsilons.size() && gm.underresolved)
            throw InputError("Gibbs grid underresolved at eps=" + std::to_string(epsilons[e]) +
                             "; increase grid_n");
        std::vector<double> masses(rep.attractors.size(), 0.0);
        double total = 0.0;
        for (std::size_t c = 0; c < gm.mass.size(); ++c) {
            if (gm.mass[c] == 0.0) continue;
            total += gm.mass[c];
            const Vec x = gm.grid.center(c);
            for (std::size_t a = 0; a < rep.attractors.size(); ++a)
                if ((x - census[rep.attractors[a]].location).norm() < ball_radius) {
                    masses[a] += gm.mass[c];
                    break;
                }
        }
        rep.outside_mass.push_back(total - std::accumulate(masses.begin(), masses.end(), 0.0));
        rep.attractor_masses.push_back(std::move(masses));
    }
    rep.limit_weights = rep.attractor_masses.back();
    return rep;
}

// ---------------------------------------------------------------------------
// Empirical occupation measure
// ---------------------------------------------------------------------------

inline double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw InputError("histograms have different sizes");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
    return 0.5 * s;
}

struct EmpiricalMeasure {
    Grid grid;
    std::vector<double> histogram;  // occupation probabilities per cell
    double tv_to_gibbs = 0.0;
    std::size_t samples = 0;
};

/// Occupation histogram of the post-burn-in Euler-Maruyama path on the
/// Gibbs grid, and its total-variation distance to the Gibbs cell masses.
inline EmpiricalMeasure empirical_invariant_measure(const Landscape& land, double eps, double dt, std::size_t steps,
                                                    std::size_t burn_in, std::uint64_t seed, int grid_n,
                                                    const Vec& x0 = Vec()) {
    if (!(steps > burn_in)) throw InputError("steps must exceed burn_in");
    EmpiricalMeasure em;
    em.grid = domain_grid(land.domain(), grid_n);
    em.histogram.assign(em.grid.cells(), 0.0);
    Vec start = x0.size() ? x0 : Vec::Zero(land.dimension());
    euler_maruyama_with(land, eps, start, dt, steps, seed, 0, [&](std::size_t k, const Vec& x) {
        if (k <= burn_in) return;
        em.histogram[em.grid.locate(x)] += 1.0;
        ++em.samples;
    });
    for (double& h : em.histogram) h /= static_cast<double>(em.samples);
    if (eps > 0.0) {
        GibbsMeasure gm = gibbs_measure(land, eps, grid_n);
        em.tv_to_gibbs = total_variation(em.histogram, gm.mass);
    } else {
        em.tv_to_gibbs = std::numeric_limits<double>::quiet_NaN();
    }
    return em;
}

// ---------------------------------------------------------------------------
// Freidlin-Wentzell action
// ---------------------------------------------------------------------------

/// J = 1/2 sum_k |(x_{k+1} - x_k)/dt - X(x_k)|_g^2 dt with g taken at x_k.
inline double fw_action(const Landscape& land, const TrajectoryRecord& traj) {
    if (traj.points.size() < 2) throw InputError("fw_action needs at least two points");
    if (traj.times.size() != traj.points.size()) throw InputError("trajectory times and points differ in length");
    const double dt = traj.times[1] - traj.times[0];
    if (!(dt > 0.0)) throw InputError("trajectory times must increase");
    for (std::size_t k = 1; k + 1 < traj.times.size(); ++k)
        if (std::abs((traj.times[k + 1] - traj.times[k]) - dt) > 1e-9 * std::max(1.0, dt))
            throw InputError("fw_action needs uniform time steps");
    const bool euclid = land.metric().is_euclidean();
    double J = 0.0;
    for (std::size_t k = 0; k + 1 < traj.points.size(); ++k) {
        const Vec& x = traj.points[k];
        Vec r = (traj.points[k + 1] - x) / dt - land.drift_unchecked(x);
        J += euclid ? r.squaredNorm() : r.dot(land.metric().matrix(x) * r);
    }
    return 0.5 * J * dt;
}

/// Uniformly timed straight segment from a to b over [0, T] with `steps` steps.
inline TrajectoryRecord straight_path(const Landscape& land, const Vec& a, const Vec& b, double T, std::size_t steps) {
    TrajectoryRecord rec;
    for (std::size_t k = 0; k <= steps; ++k) {
        const double s = static_cast<double>(k) / static_cast<double>(steps);
        Vec x = (1.0 - s) * a + s * b;
        rec.push(s * T, x, land.value_unchecked(x));
    }
    return rec;
}

}  // namespace morseland

#endif
