#ifndef MORSELAND_LANDSCAPE_HPP
#define MORSELAND_LANDSCAPE_HPP

#include "morseland/core.hpp"

#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace morseland {

// ---------------------------------------------------------------------------
// Activation functions (shared by the Hopfield metric and energy)
// ---------------------------------------------------------------------------

enum class Activation { tanh, sigmoid };

inline std::string_view to_string(Activation a) { return a == Activation::tanh ? "tanh" : "sigmoid"; }

inline Activation activation_from_string(std::string_view s) {
    if (s == "tanh") return Activation::tanh;
    if (s == "sigmoid") return Activation::sigmoid;
    throw ConfigError("unknown activation '" + std::string(s) + "'");
}

namespace activation {

inline double lower(Activation a) { return a == Activation::tanh ? -1.0 : 0.0; }
inline double upper(Activation) { return 1.0; }

inline bool in_range(Activation a, double v) { return v > lower(a) && v < upper(a); }

inline double f(Activation a, double u) {
    return a == Activation::tanh ? std::tanh(u) : 1.0 / (1.0 + std::exp(-u));
}

inline double f_prime(Activation a, double u) {
    if (a == Activation::tanh) {
        double t = std::tanh(u);
        return 1.0 - t * t;
    }
    double s = f(a, u);
    return s * (1.0 - s);
}

inline double inverse(Activation a, double v) {
    return a == Activation::tanh ? std::atanh(v) : std::log(v / (1.0 - v));
}

/// f'(f^{-1}(v)) expressed in v, so it stays accurate near the range ends.
inline double slope_at_output(Activation a, double v) {
    return a == Activation::tanh ? 1.0 - v * v : v * (1.0 - v);
}

/// d/dv f^{-1}(v) = 1 / f'(f^{-1}(v)).
inline double inverse_prime(Activation a, double v) { return 1.0 / slope_at_output(a, v); }

/// Closed form of the integral from 0 to v of f^{-1}.
inline double inverse_integral(Activation a, double v) {
    if (a == Activation::tanh) return v * std::atanh(v) + 0.5 * std::log1p(-v * v);
    auto xlogx = [](double x) { return x > 0.0 ? x * std::log(x) : 0.0; };
    return xlogx(v) + xlogx(1.0 - v);
}

}  // namespace activation

// ---------------------------------------------------------------------------
// Potential
// ---------------------------------------------------------------------------

enum class PotentialForm {
    dual_well,
    dual_cusp,
    saddle_node_family,
    flip_family,
    hopfield_energy,
    modern_hopfield_energy,
    gmm_diffusion,
    polynomial,
};

inline std::string_view to_string(PotentialForm f) {
    switch (f) {
        case PotentialForm::dual_well: return "dual-well";
        case PotentialForm::dual_cusp: return "dual-cusp";
        case PotentialForm::saddle_node_family: return "saddle-node-family";
        case PotentialForm::flip_family: return "flip-family";
        case PotentialForm::hopfield_energy: return "hopfield-energy";
        case PotentialForm::modern_hopfield_energy: return "modern-hopfield-energy";
        case PotentialForm::gmm_diffusion: return "gmm-diffusion";
        case PotentialForm::polynomial: return "polynomial";
    }
    return "unknown";
}

inline PotentialForm potential_form_from_string(std::string_view s) {
    for (auto f : {PotentialForm::dual_well, PotentialForm::dual_cusp, PotentialForm::saddle_node_family,
                   PotentialForm::flip_family, PotentialForm::hopfield_energy, PotentialForm::modern_hopfield_energy,
                   PotentialForm::gmm_diffusion, PotentialForm::polynomial})
        if (to_string(f) == s) return f;
    throw ConfigError("unknown potential form '" + std::string(s) + "'");
}

/// A scalar potential V on R^n with optional closed-form derivatives.
/// Missing derivatives fall back to central differences. An optional linear
/// tilt c.x is added on top of the base form.
struct Potential {
    PotentialForm form = PotentialForm::polynomial;
    std::vector<double> params;
    int dimension = 0;

    std::function<double(const Vec&)> value_fn;
    std::function<Vec(const Vec&)> gradient_fn;
    std::function<Mat(const Vec&)> hessian_fn;
    Vec tilt;  // empty or size `dimension`

    bool has_analytic_gradient() const { return static_cast<bool>(gradient_fn); }

    double value(const Vec& x) const {
        double v = value_fn(x);
        if (tilt.size()) v += tilt.dot(x);
        return v;
    }

    Vec gradient(const Vec& x) const {
        Vec g = gradient_fn ? gradient_fn(x) : fd_gradient(x);
        if (tilt.size()) g += tilt;
        return g;
    }

    Mat hessian(const Vec& x) const {
        if (hessian_fn) return hessian_fn(x);
        return gradient_fn ? fd_hessian_from_gradient(x) : fd_hessian_from_value(x);
    }

    /// Central differences on the base value, step max(1e-5, 1e-5 |x|).
    Vec fd_gradient(const Vec& x) const {
        const double h = std::max(1e-5, 1e-5 * x.norm());
        Vec g(x.size()), xp = x, xm = x;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            xp[i] = x[i] + h;
            xm[i] = x[i] - h;
            g[i] = (value_fn(xp) - value_fn(xm)) / (2.0 * h);
            xp[i] = xm[i] = x[i];
        }
        return g;
    }

private:
    Mat fd_hessian_from_gradient(const Vec& x) const {
        const double h = std::max(1e-5, 1e-5 * x.norm());
        const auto n = x.size();
        Mat H(n, n);
        Vec xp = x, xm = x;
        for (Eigen::Index i = 0; i < n; ++i) {
            xp[i] = x[i] + h;
            xm[i] = x[i] - h;
            H.col(i) = (gradient_fn(xp) - gradient_fn(xm)) / (2.0 * h);
            xp[i] = xm[i] = x[i];
        }
        return 0.5 * (H + H.transpose());
    }

    Mat fd_hessian_from_value(const Vec& x) const {
        const double h = std::max(1e-4, 1e-4 * x.norm());
        const auto n = x.size();
        Mat H(n, n);
        const double f0 = value_fn(x);
        Vec y = x;
        for (Eigen::Index i = 0; i < n; ++i) {
            y[i] = x[i] + h;
            double fp = value_fn(y);
            y[i] = x[i] - h;
            double fm = value_fn(y);
            y[i] = x[i];
            H(i, i) = (fp - 2.0 * f0 + fm) / (h * h);
            for (Eigen::Index j = 0; j < i; ++j) {
                auto at = [&](double si, double sj) {
                    y[i] = x[i] + si * h;
                    y[j] = x[j] + sj * h;
                    double v = value_fn(y);
                    y[i] = x[i];
                    y[j] = x[j];
                    return v;
                };
                double hij = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h * h);
                H(i, j) = H(j, i) = hij;
            }
        }
        return H;
    }
};

// ---------------------------------------------------------------------------
// Metric
// ---------------------------------------------------------------------------

enum class MetricForm { euclidean, activation_diagonal, gaussian_bump_family };

inline std::string_view to_string(MetricForm f) {
    switch (f) {
        case MetricForm::euclidean: return "euclidean";
        case MetricForm::activation_diagonal: return "activation-diagonal";
        case MetricForm::gaussian_bump_family: return "gaussian-bump-family";
    }
    return "unknown";
}

inline MetricForm metric_form_from_string(std::string_view s) {
    for (auto f : {MetricForm::euclidean, MetricForm::activation_diagonal, MetricForm::gaussian_bump_family})
        if (to_string(f) == s) return f;
    throw ConfigError("unknown metric form '" + std::string(s) + "'");
}

/// Normal density with mean mu and standard deviation sigma.
inline double gaussian_density(double x, double mu, double sigma) {
    const double z = (x - mu) / sigma;
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi * sigma * sigma);
}

/// Riemannian metric g_ij(x). `inverse` returns g^ij, the matrix that maps the
/// gradient covector to the drift.
struct Metric {
    MetricForm form = MetricForm::euclidean;
    std::vector<double> params;

    bool is_euclidean() const { return form == MetricForm::euclidean; }

    Mat matrix(const Vec& x) const {
        const auto n = x.size();
        switch (form) {
            case MetricForm::euclidean: return Mat::Identity(n, n);
            case MetricForm::gaussian_bump_family: {
                Mat g = Mat::Identity(n, n);
                const double off = bump_off_diagonal(x);
                g(0, 1) = g(1, 0) = off;
                return g;
            }
            case MetricForm::activation_diagonal: {
                Mat g = Mat::Zero(n, n);
                for (Eigen::Index i = 0; i < n; ++i) g(i, i) = 1.0 / activation::slope_at_output(act(), x[i]);
                return g;
            }
        }
        return Mat::Identity(n, n);
    }

    Mat inverse(const Vec& x) const {
        const auto n = x.size();
        switch (form) {
            case MetricForm::euclidean: return Mat::Identity(n, n);
            case MetricForm::gaussian_bump_family: {
                // g = I + o (e1 e2^T + e2 e1^T); the 2x2 block inverts in closed form.
                Mat gi = Mat::Identity(n, n);
                const double o = bump_off_diagonal(x);
                const double det = 1.0 - o * o;
                gi(0, 0) = gi(1, 1) = 1.0 / det;
                gi(0, 1) = gi(1, 0) = -o / det;
                return gi;
            }
            case MetricForm::activation_diagonal: {
                Mat gi = Mat::Zero(n, n);
                for (Eigen::Index i = 0; i < n; ++i) gi(i, i) = activation::slope_at_output(act(), x[i]);
                return gi;
            }
        }
        return Mat::Identity(n, n);
    }

    /// Off-diagonal entry -6 eta G(v1; -1, 1) G(v2; 0, 2) of the flip-family metric.
    double bump_off_diagonal(const Vec& x) const {
        const double eta = params.empty() ? 0.0 : params[0];
        return -6.0 * eta * gaussian_density(x[0], -1.0, 1.0) * gaussian_density(x[1], 0.0, 2.0);
    }

    Activation act() const {
        return (!params.empty() && params[0] != 0.0) ? Activation::sigmoid : Activation::tanh;
    }
};

// ---------------------------------------------------------------------------
// Domain
// ---------------------------------------------------------------------------

enum class DomainShape { disc, box };

/// Compact region the dynamics live on. Discs are the default; boxes model
/// the open activation cube of a Hopfield network (with an inner margin).
struct Domain {
    double radius = 3.0;
    int dimension = 2;
    DomainShape shape = DomainShape::disc;
    double box_lower = -1.0;
    double box_upper = 1.0;
    double margin = 0.0;

    bool contains(const Vec& x) const {
        if (shape == DomainShape::disc) return x.norm() <= radius;
        for (Eigen::Index i = 0; i < x.size(); ++i)
            if (!(x[i] > box_lower + margin && x[i] < box_upper - margin)) return false;
        return true;
    }

    /// Axis-aligned bounding box [lo, hi] per coordinate.
    std::pair<double, double> bounds() const {
        if (shape == DomainShape::disc) return {-radius, radius};
        return {box_lower + margin, box_upper - margin};
    }
};

// ---------------------------------------------------------------------------
// Landscape: the gradient system X = -g^{-1} grad V on a domain
// ---------------------------------------------------------------------------

class Landscape {
public:
    Landscape() = default;
    Landscape(Potential potential, Metric metric, Domain domain)
        : potential_(std::move(potential)), metric_(std::move(metric)), domain_(std::move(domain)) {
        if (potential_.dimension != domain_.dimension)
            throw ConfigError("potential and domain dimensions disagree");
        if (potential_.dimension < 1 || potential_.dimension > max_dimension)
            throw ConfigError("dimension out of range");
        if (potential_.tilt.size() && potential_.tilt.size() != potential_.dimension)
            throw ConfigError("tilt length does not match dimension");
        if (metric_.form == MetricForm::gaussian_bump_family && potential_.dimension < 2)
            throw ConfigError("gaussian-bump metric needs dimension >= 2");
    }

    const Potential& potential() const { return potential_; }
    const Metric& metric() const { return metric_; }
    const Domain& domain() const { return domain_; }
    int dimension() const { return potential_.dimension; }

    bool contains(const Vec& x) const { return x.size() == dimension() && domain_.contains(x); }

    double value(const Vec& x) const {
        check(x);
        return potential_.value(x);
    }

    Vec gradient(const Vec& x) const {
        check(x);
        return potential_.gradient(x);
    }

    Mat hessian(const Vec& x) const {
        check(x);
        return potential_.hessian(x);
    }

    Mat inverse_metric(const Vec& x) const {
        check(x);
        return metric_.inverse(x);
    }

    /// X(x) = -g^{ij}(x) dV/dx^j.
    Vec drift(const Vec& x) const {
        check(x);
        return drift_unchecked(x);
    }

    /// Formula evaluation without the membership test. Integrators use it for
    /// intermediate stages and decide themselves what leaving the domain means.
    double value_unchecked(const Vec& x) const { return potential_.value(x); }

    Vec drift_unchecked(const Vec& x) const {
        Vec g = potential_.gradient(x);
        if (metric_.is_euclidean()) return -g;
        Mat gi = metric_.inverse(x);
        Eigen::LLT<Mat> llt(gi);
        if (llt.info() != Eigen::Success)
            throw NumericError("inverse metric not positive definite at " + format_point(x));
        return -(gi * g);
    }

    /// Same landscape with an extra linear term c.x in the potential.
    Landscape tilted(const Vec& c) const {
        if (c.size() != dimension()) throw ConfigError("tilt length does not match dimension");
        Landscape out = *this;
        if (out.potential_.tilt.size())
            out.potential_.tilt += c;
        else
            out.potential_.tilt = c;
        return out;
    }

    Landscape with_radius(double r) const {
        Landscape out = *this;
        out.domain_.radius = r;
        return out;
    }

private:
    void check(const Vec& x) const {
        if (x.size() != dimension())
            throw DomainError("point has dimension " + std::to_string(x.size()) + ", expected " +
                              std::to_string(dimension()));
        if (!domain_.contains(x)) throw DomainError("point " + format_point(x) + " outside domain");
    }

    Potential potential_;
    Metric metric_;
    Domain domain_;
};

inline double eval_potential(const Landscape& land, const Vec& x) { return land.value(x); }
inline Vec grad_potential(const Landscape& land, const Vec& x) { return land.gradient(x); }
inline Mat hessian(const Landscape& land, const Vec& x) { return land.hessian(x); }
inline Vec drift(const Landscape& land, const Vec& x) { return land.drift(x); }

// ---------------------------------------------------------------------------
// Polynomial potentials
// ---------------------------------------------------------------------------

struct Monomial {
    std::vector<int> exponents;
    double coefficient = 0.0;
};

namespace detail {
inline double ipow(double x, int e) {
    double r = 1.0;
    for (int k = 0; k < e; ++k) r *= x;
    return r;
}
}  // namespace detail

/// Sum of c * prod x_i^{e_i}. Exact gradient and Hessian.
inline Potential make_polynomial_potential(int dimension, std::vector<Monomial> terms) {
    for (const auto& t : terms) {
        if (static_cast<int>(t.exponents.size()) != dimension)
            throw ConfigError("monomial exponent tuple length does not match dimension");
        for (int e : t.exponents)
            if (e < 0) throw ConfigError("negative monomial exponent");
    }
    Potential p;
    p.form = PotentialForm::polynomial;
    p.dimension = dimension;
    // Flattened params: [count, (exponents..., coefficient) per term].
    p.params.push_back(static_cast<double>(terms.size()));
    for (const auto& t : terms) {
        for (int e : t.exponents) p.params.push_back(e);
        p.params.push_back(t.coefficient);
    }
    auto shared = std::make_shared<const std::vector<Monomial>>(std::move(terms));
    p.value_fn = [shared](const Vec& x) {
        double s = 0.0;
        for (const auto& t : *shared) {
            double m = t.coefficient;
            for (std::size_t i = 0; i < t.exponents.size(); ++i) m *= detail::ipow(x[i], t.exponents[i]);
            s += m;
        }
        return s;
    };
    p.gradient_fn = [shared, dimension](const Vec& x) {
        Vec g = Vec::Zero(dimension);
        for (const auto& t : *shared) {
            for (int i = 0; i < dimension; ++i) {
                if (t.exponents[i] == 0) continue;
                double m = t.coefficient * t.exponents[i];
                for (int k = 0; k < dimension; ++k)
                    m *= detail::ipow(x[k], k == i ? t.exponents[k] - 1 : t.exponents[k]);
                g[i] += m;
            }
        }
        return g;
    };
    p.hessian_fn = [shared, dimension](const Vec& x) {
        Mat H = Mat::Zero(dimension, dimension);
        for (const auto& t : *shared) {
            for (int i = 0; i < dimension; ++i) {
                for (int j = 0; j <= i; ++j) {
                    std::vector<int> e = t.exponents;
                    double c = t.coefficient * e[i];
                    if (c == 0.0) continue;
                    e[i] -= 1;
                    c *= e[j];
                    if (c == 0.0) continue;
                    e[j] -= 1;
                    double m = c;
                    for (int k = 0; k < dimension; ++k) m *= detail::ipow(x[k], e[k]);
                    H(i, j) += m;
                    if (i != j) H(j, i) += m;
                }
            }
        }
        return H;
    };
    return p;
}

/// Inverse of the flattened params encoding used by make_polynomial_potential.
inline std::vector<Monomial> polynomial_terms_from_params(int dimension, const std::vector<double>& params) {
    if (params.empty()) throw ConfigError("polynomial params are empty");
    const auto count = static_cast<std::size_t>(params[0]);
    if (params.size() != 1 + count * static_cast<std::size_t>(dimension + 1))
        throw ConfigError("polynomial params length does not match term count and dimension");
    std::vector<Monomial> terms(count);
    std::size_t k = 1;
    for (auto& t : terms) {
        t.exponents.resize(dimension);
        for (int i = 0; i < dimension; ++i) t.exponents[i] = static_cast<int>(params[k++]);
        t.coefficient = params[k++];
    }
    return terms;
}

// ---------------------------------------------------------------------------
// Analytic builtins (coefficients fixed to the reference examples)
// ---------------------------------------------------------------------------

namespace builtin {

inline double extra_square_sum(const Vec& x) {
    double s = 0.0;
    for (Eigen::Index i = 2; i < x.size(); ++i) s += x[i] * x[i];
    return s;
}

/// V = v1^4/4 + v2^4/4 - v1^2 + v2^2 + sum_{i>=3} v_i^2
inline Potential dual_well(int dim = 2) {
    Potential p;
    p.form = PotentialForm::dual_well;
    p.dimension = dim;
    p.value_fn = [](const Vec& x) {
        const double a = x[0], b = x[1];
        return 0.25 * a * a * a * a + 0.25 * b * b * b * b - a * a + b * b + extra_square_sum(x);
    };
    p.gradient_fn = [](const Vec& x) {
        Vec g = 2.0 * x;
        g[0] = x[0] * x[0] * x[0] - 2.0 * x[0];
        g[1] = x[1] * x[1] * x[1] + 2.0 * x[1];
        return g;
    };
    p.hessian_fn = [](const Vec& x) {
        Mat H = 2.0 * Mat::Identity(x.size(), x.size());
        H(0, 0) = 3.0 * x[0] * x[0] - 2.0;
        H(1, 1) = 3.0 * x[1] * x[1] + 2.0;
        return H;
    };
    return p;
}

/// V = (v1^4 + v2^4 - 3 v2^3 + 7 v2 v1^2 + v2^2/10 - 2 v2) / 10 + sum_{i>=3} v_i^2
inline Potential dual_cusp(int dim = 2) {
    Potential p;
    p.form = PotentialForm::dual_cusp;
    p.dimension = dim;
    p.value_fn = [](const Vec& x) {
        const double a = x[0], b = x[1];
        return 0.1 * (a * a * a * a + b * b * b * b - 3.0 * b * b * b + 7.0 * b * a * a + 0.1 * b * b - 2.0 * b) +
               extra_square_sum(x);
    };
    p.gradient_fn = [](const Vec& x) {
        const double a = x[0], b = x[1];
        Vec g = 2.0 * x;
        g[0] = 0.1 * (4.0 * a * a * a + 14.0 * a * b);
        g[1] = 0.1 * (4.0 * b * b * b - 9.0 * b * b + 7.0 * a * a + 0.2 * b - 2.0);
        return g;
    };
    p.hessian_fn = [](const Vec& x) {
        const double a = x[0], b = x[1];
        Mat H = 2.0 * Mat::Identity(x.size(), x.size());
        H(0, 0) = 0.1 * (12.0 * a * a + 14.0 * b);
        H(0, 1) = H(1, 0) = 0.1 * 14.0 * a;
        H(1, 1) = 0.1 * (12.0 * b * b - 18.0 * b + 0.2);
        return H;
    };
    return p;
}

/// V = v1^4/6 + v2^4/6 - v2 v1^2 / 2 - v2 / 2 + sum_{i>=3} v_i^2 + eta (6/10) v1
inline Potential saddle_node_family(double eta, int dim = 2) {
    Potential p;
    p.form = PotentialForm::saddle_node_family;
    p.params = {eta};
    p.dimension = dim;
    p.value_fn = [eta](const Vec& x) {
        const double a = x[0], b = x[1];
        return a * a * a * a / 6.0 + b * b * b * b / 6.0 - 0.5 * b * a * a - 0.5 * b + extra_square_sum(x) +
               eta * 0.6 * a;
    };
    p.gradient_fn = [eta](const Vec& x) {
        const double a = x[0], b = x[1];
        Vec g = 2.0 * x;
        g[0] = 2.0 / 3.0 * a * a * a - a * b + 0.6 * eta;
        g[1] = 2.0 / 3.0 * b * b * b - 0.5 * a * a - 0.5;
        return g;
    };
    p.hessian_fn = [](const Vec& x) {
        const double a = x[0], b = x[1];
        Mat H = 2.0 * Mat::Identity(x.size(), x.size());
        H(0, 0) = 2.0 * a * a - b;
        H(0, 1) = H(1, 0) = -a;
        H(1, 1) = 2.0 * b * b;
        return H;
    };
    return p;
}

/// V = (v1^4/2 + v2^4/4 - v2^3 + 2 v2 v1^2 - 2 v2^2 + 3 v2 / 2 + sum_{i>=3} v_i^2 + eta v1 / 2) / 5
inline Potential flip_family(double eta, int dim = 2) {
    Potential p;
    p.form = PotentialForm::flip_family;
    p.params = {eta};
    p.dimension = dim;
    p.value_fn = [eta](const Vec& x) {
        const double a = x[0], b = x[1];
        return 0.2 * (0.5 * a * a * a * a + 0.25 * b * b * b * b - b * b * b + 2.0 * b * a * a - 2.0 * b * b +
                      1.5 * b + extra_square_sum(x) + 0.5 * eta * a);
    };
    p.gradient_fn = [eta](const Vec& x) {
        const double a = x[0], b = x[1];
        Vec g = 0.4 * x;
        g[0] = 0.2 * (2.0 * a * a * a + 4.0 * a * b + 0.5 * eta);
        g[1] = 0.2 * (b * b * b - 3.0 * b * b + 2.0 * a * a - 4.0 * b + 1.5);
        return g;
    };
    p.hessian_fn = [](const Vec& x) {
        const double a = x[0], b = x[1];
        Mat H = 0.4 * Mat::Identity(x.size(), x.size());
        H(0, 0) = 0.2 * (6.0 * a * a + 4.0 * b);
        H(0, 1) = H(1, 0) = 0.2 * 4.0 * a;
        H(1, 1) = 0.2 * (3.0 * b * b - 6.0 * b - 4.0);
        return H;
    };
    return p;
}

inline Metric flip_metric(double eta) { return Metric{MetricForm::gaussian_bump_family, {eta}}; }

}  // namespace builtin

inline Domain disc(int dim, double radius) {
    Domain d;
    d.dimension = dim;
    d.radius = radius;
    return d;
}

}  // namespace morseland

#endif
