#ifndef MORSELAND_TESTS_SUPPORT_HPP
#define MORSELAND_TESTS_SUPPORT_HPP

#include "morseland/morseland.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace support {

using namespace morseland;

/// Confining random quartic on the disc of radius 3:
/// (x^4 + y^4)/4 plus every monomial of degree 1..3. Coefficients are uniform
/// in [-1, 1] (degree 1), [-2, 1] (degree 2, biased negative so that several
/// wells are common) and [-0.3, 0.3] (degree 3, keeps the quartic dominant on
/// the boundary circle).
/// Draws are repeated until the field points inward on the whole circle, the
/// standing precondition for a census on a disc.
inline Landscape random_polynomial(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (;;) {
        std::vector<Monomial> terms{{{4, 0}, 0.25}, {{0, 4}, 0.25}};
        for (int deg = 1; deg <= 3; ++deg)
            for (int i = 0; i <= deg; ++i) {
                const double c = deg == 2 ? 1.5 * u(rng) - 0.5 : (deg == 3 ? 0.3 : 1.0) * u(rng);
                terms.push_back({{i, deg - i}, c});
            }
        Landscape land(make_polynomial_potential(2, terms), Metric{}, disc(2, 3.0));
        if (boundary_transversality(land).pass) return land;
    }
}

/// Uniform point in the disc of radius r (rejection sampling).
inline Vec random_point(std::mt19937_64& rng, int dim, double r) {
    std::uniform_real_distribution<double> u(-r, r);
    for (;;) {
        Vec x(dim);
        for (int i = 0; i < dim; ++i) x[i] = u(rng);
        if (x.norm() <= r) return x;
    }
}

/// Distance from x to the edge of the landscape's domain.
inline double boundary_distance(const Landscape& land, const Vec& x) {
    const Domain& d = land.domain();
    if (d.shape == DomainShape::disc) return d.radius - x.norm();
    double m = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < x.size(); ++i)
        m = std::min({m, x[i] - d.box_lower - d.margin, d.box_upper - d.margin - x[i]});
    return m;
}

/// Largest relative deviation between the analytic gradient and central
/// differences at x. The step shrinks near the domain edge, where barrier
/// terms make higher derivatives large.
inline double gradient_fd_error(const Landscape& land, const Vec& x) {
    const double h = std::min(1e-5, 1e-3 * boundary_distance(land, x));
    const Vec g = land.gradient(x);
    double err = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Vec a = x, b = x;
        a[i] += h;
        b[i] -= h;
        const double fd = (land.value(a) - land.value(b)) / (2.0 * h);
        err = std::max(err, std::abs(fd - g[i]) / std::max(1.0, std::abs(g[i])));
    }
    return err;
}

struct NamedLandscape {
    std::string name;
    Landscape land;
};

/// Every builtin form at a representative parameter value.
inline std::vector<NamedLandscape> builtin_landscapes() {
    std::vector<NamedLandscape> out;
    out.push_back({"dual-well", make_builtin("dual-well")});
    out.push_back({"dual-cusp", make_builtin("dual-cusp")});
    out.push_back({"saddle-node-family(0)", make_builtin("saddle-node-family", {0.0})});
    out.push_back({"flip-family(0.5)", make_builtin("flip-family", {0.5})});
    // Two-neuron Hopfield net, W = [[0, 1], [1, 0]], Rinv = 0.5, tanh.
    out.push_back({"hopfield-energy", make_builtin("hopfield-energy", {2, 0, 0, 1, 1, 0, 0, 0, 0.5, 0.5})});
    const Mat xi = builtin::triangle_patterns(0.0);
    std::vector<double> mp{2, 3, 30};
    for (Eigen::Index j = 0; j < xi.cols(); ++j)
        for (Eigen::Index i = 0; i < xi.rows(); ++i) mp.push_back(xi(i, j));
    out.push_back({"modern-hopfield-energy", make_builtin("modern-hopfield-energy", mp)});
    out.push_back({"gmm-diffusion(t=0.3)",
                   make_builtin("gmm-diffusion",
                                {0.3, 0, 0.1, 20, 0.1, 4, 0.25, 0.25, 0.25, 0.25, -1, -1, -1, 1, 1, -1, 1, 1})});
    return out;
}

}  // namespace support

#endif
