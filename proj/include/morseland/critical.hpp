#ifndef MORSELAND_CRITICAL_HPP
#define MORSELAND_CRITICAL_HPP

#include "morseland/landscape.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace morseland {

enum class PointKind { attractor, saddle, repellor };

inline std::string_view to_string(PointKind k) {
    switch (k) {
        case PointKind::attractor: return "attractor";
        case PointKind::saddle: return "saddle";
        case PointKind::repellor: return "repellor";
    }
    return "unknown";
}

struct CriticalPoint {
    Vec location;
    double value = 0.0;
    Vec eigenvalues;  // Hessian spectrum, ascending
    Mat eigenvectors;  // columns match eigenvalues
    int index = 0;
    bool hyperbolic = true;
    PointKind kind = PointKind::attractor;

    double min_abs_eigenvalue() const {
        return eigenvalues.size() ? eigenvalues.cwiseAbs().minCoeff() : std::numeric_limits<double>::infinity();
    }
    bool is_attractor() const { return kind == PointKind::attractor; }
    bool is_saddle() const { return kind == PointKind::saddle; }
};

using Census = std::vector<CriticalPoint>;

struct CensusOptions {
    double newton_tol = 1e-10;
    double polish_tol = 1e-14;
    int max_iterations = 60;
    double merge_radius = 1e-5;
    double hyperbolic_threshold = 1e-6;
    // Seed lattices with more points than this fall back to Halton sampling.
    std::size_t max_seeds = 20000;
    double classify_gradient_tol = 1e-6;
    // Second Newton pass seeded at midpoints of pairs of found points. Saddles
    // with narrow Newton basins usually sit between the points they separate.
    bool midpoint_pass = true;
    std::size_t max_midpoint_seeds = 20000;
};

// ---------------------------------------------------------------------------
// Newton on grad V = 0
// ---------------------------------------------------------------------------

struct NewtonResult {
    Vec point;
    double gradient_norm = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
};

/// Newton with Levenberg damping and a gradient-of-residual fallback. Points
/// that would leave the domain count as failed steps.
inline NewtonResult newton_critical(const Landscape& land, const Vec& x0, const CensusOptions& opt = {}) {
    const Potential& pot = land.potential();
    const Domain& dom = land.domain();
    const auto n = x0.size();
    NewtonResult r;
    Vec x = x0;
    Vec g = pot.gradient(x);
    double gn = g.norm();
    if (!std::isfinite(gn)) return r;

    auto try_point = [&](const Vec& y, Vec& gy, double& gny) {
        if (!y.allFinite() || !dom.contains(y)) return false;
        gy = pot.gradient(y);
        gny = gy.norm();
        return std::isfinite(gny) && gny < gn;
    };

    // Iterations continue past newton_tol while they still help, so points
    // near a degenerate root are polished as far as the Newton contraction allows.
    for (int it = 0; it < opt.max_iterations && gn >= opt.polish_tol; ++it) {
        r.iterations = it + 1;
        Mat H = pot.hessian(x);
        Vec y, gy;
        double gny = 0.0;
        bool ok = false;

        Eigen::FullPivLU<Mat> lu(H);
        if (lu.isInvertible()) {
            y = x - lu.solve(g);
            ok = try_point(y, gy, gny);
        }
        // Levenberg: (H^T H + mu I) dx = -H^T g keeps the step well defined at
        // singular or indefinite H.
        for (double mu = 1e-6; !ok && mu <= 1e6; mu *= 10.0) {
            Mat A = H.transpose() * H + mu * Mat::Identity(n, n);
            y = x - A.ldlt().solve(H.transpose() * g);
            ok = try_point(y, gy, gny);
        }
        if (!ok) {
            // Backtracking descent on 0.5 |grad V|^2, whose gradient is H g.
            Vec d = H * g;
            double alpha = 1.0;
            const double dn = d.norm();
            if (dn > 0.0) alpha = std::min(1.0, gn / dn);
            for (int k = 0; k < 50 && !ok; ++k, alpha *= 0.5) {
                y = x - alpha * d;
                ok = try_point(y, gy, gny);
            }
        }
        if (!ok) break;
        x = std::move(y);
        g = std::move(gy);
        gn = gny;
    }
    r.point = x;
    r.gradient_norm = gn;
    r.converged = gn < opt.newton_tol;
    return r;
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

/// Spectrum, index and kind at a point. Throws NotCriticalError when the
/// gradient is not small there.
inline CriticalPoint classify(const Landscape& land, const Vec& location, const CensusOptions& opt = {}) {
    const Vec g = land.gradient(location);
    if (g.norm() >= opt.classify_gradient_tol)
        throw NotCriticalError("gradient norm " + std::to_string(g.norm()) + " at " + format_point(location));
    CriticalPoint cp;
    cp.location = location;
    cp.value = land.value(location);
    Mat H = land.hessian(location);
    H = 0.5 * (H + H.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(H);
    cp.eigenvalues = es.eigenvalues();
    cp.eigenvectors = es.eigenvectors();
    cp.hyperbolic = cp.min_abs_eigenvalue() > opt.hyperbolic_threshold;
    cp.index = 0;
    for (Eigen::Index i = 0; i < cp.eigenvalues.size(); ++i)
        if (cp.eigenvalues[i] < -opt.hyperbolic_threshold) ++cp.index;
    const int n = land.dimension();
    cp.kind = cp.index == 0 ? PointKind::attractor : (cp.index == n ? PointKind::repellor : PointKind::saddle);
    return cp;
}

/// Newton polish from a nearby point, then classify.
inline CriticalPoint refine_critical_point(const Landscape& land, const Vec& x, const CensusOptions& opt = {}) {
    NewtonResult nr = newton_critical(land, x, opt);
    return classify(land, nr.converged ? nr.point : x, opt);
}

// ---------------------------------------------------------------------------
// Census
// ---------------------------------------------------------------------------

/// Seeds: cell centres of a density^n lattice over the domain's bounding
/// box, kept when inside the domain. Large lattices switch to Halton points.
inline std::vector<Vec> census_seeds(const Domain& dom, int density, std::size_t max_seeds) {
    const int n = dom.dimension;
    auto [lo, hi] = dom.bounds();
    std::vector<Vec> seeds;
    double total = std::pow(static_cast<double>(density), n);
    if (total <= static_cast<double>(max_seeds)) {
        const std::size_t count = static_cast<std::size_t>(total);
        std::vector<int> idx(n, 0);
        for (std::size_t k = 0; k < count; ++k) {
            Vec x(n);
            for (int i = 0; i < n; ++i) x[i] = lo + (hi - lo) * (idx[i] + 0.5) / density;
            if (dom.contains(x)) seeds.push_back(std::move(x));
            for (int i = 0; i < n; ++i) {
                if (++idx[i] < density) break;
                idx[i] = 0;
            }
        }
    } else {
        for (std::size_t k = 0; k < max_seeds; ++k) {
            Vec x = (lo + (hi - lo) * halton(k, n).array()).matrix();
            if (dom.contains(x)) seeds.push_back(std::move(x));
        }
    }
    return seeds;
}

namespace detail {

/// Deterministic census order: by index, then lexicographic location with a
/// small tolerance so that rounding noise does not flip ties.
inline bool census_less(const CriticalPoint& a, const CriticalPoint& b) {
    if (a.index != b.index) return a.index < b.index;
    for (Eigen::Index i = 0; i < a.location.size(); ++i) {
        const double d = a.location[i] - b.location[i];
        if (std::abs(d) > 1e-7) return d < 0.0;
    }
    return false;
}

}  // namespace detail

inline void sort_census(Census& census) { std::stable_sort(census.begin(), census.end(), detail::census_less); }

/// Merge candidate roots within merge_radius (first occurrence wins).
inline std::vector<Vec> merge_roots(const std::vector<Vec>& roots, double radius) {
    std::vector<Vec> out;
    for (const auto& r : roots) {
        bool dup = false;
        for (const auto& o : out)
            if ((o - r).norm() < radius) {
                dup = true;
                break;
            }
        if (!dup) out.push_back(r);
    }
    return out;
}

namespace detail {

inline std::vector<Vec> newton_roots(const Landscape& land, const std::vector<Vec>& seeds, const CensusOptions& opt) {
    std::vector<std::optional<Vec>> roots(seeds.size());
    parallel_for(seeds.size(), [&](std::size_t i) {
        NewtonResult nr = newton_critical(land, seeds[i], opt);
        if (nr.converged && land.contains(nr.point)) roots[i] = nr.point;
    });
    std::vector<Vec> found;
    for (auto& r : roots)
        if (r) found.push_back(std::move(*r));
    return found;
}

}  // namespace detail

inline Census census_from_seeds(const Landscape& land, const std::vector<Vec>& seeds, const CensusOptions& opt = {}) {
    std::vector<Vec> found = merge_roots(detail::newton_roots(land, seeds, opt), opt.merge_radius);
    if (opt.midpoint_pass && found.size() > 1) {
        std::vector<Vec> mids;
        for (std::size_t i = 0; i < found.size() && mids.size() < opt.max_midpoint_seeds; ++i)
            for (std::size_t j = i + 1; j < found.size() && mids.size() < opt.max_midpoint_seeds; ++j) {
                Vec m = 0.5 * (found[i] + found[j]);
                if (land.contains(m)) mids.push_back(std::move(m));
            }
        for (auto& r : detail::newton_roots(land, mids, opt)) found.push_back(std::move(r));
        found = merge_roots(found, opt.merge_radius);
    }
    Census census;
    for (const auto& x : found) census.push_back(classify(land, x, opt));
    sort_census(census);
    return census;
}

inline Census find_critical_points(const Landscape& land, int grid_density = 24, const CensusOptions& opt = {}) {
    if (grid_density < 8) throw InputError("grid_density must be at least 8");
    return census_from_seeds(land, census_seeds(land.domain(), grid_density, opt.max_seeds), opt);
}

inline std::size_t count_kind(const Census& c, PointKind k) {
    return static_cast<std::size_t>(std::count_if(c.begin(), c.end(), [k](const auto& p) { return p.kind == k; }));
}

// ---------------------------------------------------------------------------
// Checks
// ---------------------------------------------------------------------------

struct PoincareHopfReport {
    int sum = 0;
    bool pass = false;
};

/// Sum of (-1)^index; equals 1 for a complete census of an inward field on a disc.
inline PoincareHopfReport poincare_hopf_check(const Census& census, int /*dimension*/ = 0) {
    PoincareHopfReport r;
    for (const auto& p : census) r.sum += (p.index % 2 == 0) ? 1 : -1;
    r.pass = r.sum == 1;
    return r;
}

/// Pairs of census positions (i < j) of attractors whose values differ by < tol.
inline std::vector<std::pair<std::size_t, std::size_t>> resonance_check(const Census& census, double tol) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < census.size(); ++i) {
        if (!census[i].is_attractor()) continue;
        for (std::size_t j = i + 1; j < census.size(); ++j)
            if (census[j].is_attractor() && std::abs(census[i].value - census[j].value) < tol) out.emplace_back(i, j);
    }
    return out;
}

struct MorseReport {
    bool morse_ok = true;
    double min_abs_eigenvalue = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> nonhyperbolic;
};

inline MorseReport morse_report(const Census& census, double threshold = 1e-6) {
    MorseReport r;
    for (std::size_t i = 0; i < census.size(); ++i) {
        const double m = census[i].min_abs_eigenvalue();
        r.min_abs_eigenvalue = std::min(r.min_abs_eigenvalue, m);
        if (!(m > threshold)) r.nonhyperbolic.push_back(i);
    }
    r.morse_ok = r.nonhyperbolic.empty();
    return r;
}

/// Position of the census point nearest to x, or -1 if none is within radius.
inline int nearest_point(const Census& census, const Vec& x, double radius) {
    int best = -1;
    double bd = radius;
    for (std::size_t i = 0; i < census.size(); ++i) {
        double d = (census[i].location - x).norm();
        if (d < bd) {
            bd = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

}  // namespace morseland

#endif
