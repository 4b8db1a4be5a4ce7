#ifndef MORSELAND_HOPFIELD_HPP
#define MORSELAND_HOPFIELD_HPP

#include "morseland/critical.hpp"
#include "morseland/flow.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace morseland {

// ---------------------------------------------------------------------------
// Classic continuous network
// ---------------------------------------------------------------------------

/// Continuous Hopfield network. Feature states v live in the open activation
/// cube, hidden states u = f^{-1}(v) on all of R^N.
struct HopfieldNet {
    Mat W;
    Vec B;
    Vec Rinv;
    Activation act = Activation::tanh;

    int size() const { return static_cast<int>(W.rows()); }
};

/// Validates and fills defaults (B = 0). W must be exactly symmetric with a
/// zero diagonal and Rinv nonnegative.
inline HopfieldNet make_hopfield(Mat W, Vec Rinv, Activation act = Activation::tanh, Vec B = Vec()) {
    const auto n = W.rows();
    if (n < 1 || W.cols() != n) throw ConfigError("weight matrix must be square and nonempty");
    if (n > max_dimension) throw ConfigError("network larger than the supported dimension");
    if (W != W.transpose()) throw ConfigError("weight matrix is not symmetric");
    if (W.diagonal().cwiseAbs().maxCoeff() != 0.0) throw ConfigError("weight matrix diagonal is not zero");
    if (Rinv.size() == 1 && n > 1) Rinv = Vec::Constant(n, Rinv[0]);
    if (Rinv.size() != n) throw ConfigError("Rinv length does not match the network size");
    if ((Rinv.array() < 0.0).any()) throw ConfigError("Rinv entries must be nonnegative");
    if (B.size() == 0) B = Vec::Zero(n);
    if (B.size() != n) throw ConfigError("bias length does not match the network size");
    return HopfieldNet{std::move(W), std::move(B), std::move(Rinv), act};
}

inline HopfieldNet make_hopfield(Mat W, double rinv, Activation act = Activation::tanh) {
    const auto n = W.rows();
    return make_hopfield(std::move(W), Vec::Constant(n, rinv), act);
}

namespace detail {

inline void check_feature_state(const HopfieldNet& net, const Vec& v) {
    if (v.size() != net.size()) throw DomainError("feature state has the wrong length");
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (!activation::in_range(net.act, v[i]))
            throw DomainError("feature state " + format_point(v) + " is outside the open activation range");
}

}  // namespace detail

/// -1/2 v^T W v + B.v + sum_i Rinv_i int_0^{v_i} f^{-1}.
inline double hopfield_energy(const HopfieldNet& net, const Vec& v) {
    detail::check_feature_state(net, v);
    double e = -0.5 * v.dot(net.W * v) + net.B.dot(v);
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (net.Rinv[i] != 0.0) e += net.Rinv[i] * activation::inverse_integral(net.act, v[i]);
    return e;
}

/// dV/dv = -W v + B + Rinv f^{-1}(v).
inline Vec hopfield_energy_gradient(const HopfieldNet& net, const Vec& v) {
    detail::check_feature_state(net, v);
    Vec g = -(net.W * v) + net.B;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (net.Rinv[i] != 0.0) g[i] += net.Rinv[i] * activation::inverse(net.act, v[i]);
    return g;
}

/// -W + diag(Rinv / f'(f^{-1}(v))).
inline Mat hopfield_energy_hessian(const HopfieldNet& net, const Vec& v) {
    detail::check_feature_state(net, v);
    Mat H = -net.W;
    for (Eigen::Index i = 0; i < v.size(); ++i) H(i, i) += net.Rinv[i] * activation::inverse_prime(net.act, v[i]);
    return H;
}

/// du/dt = W f(u) - B - Rinv u, the negative energy gradient at v = f(u).
inline Vec hidden_drift(const HopfieldNet& net, const Vec& u) {
    if (u.size() != net.size()) throw DomainError("hidden state has the wrong length");
    Vec fu(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) fu[i] = activation::f(net.act, u[i]);
    return net.W * fu - net.B - net.Rinv.cwiseProduct(u);
}

/// dv/dt = -f'(f^{-1}(v)) dV/dv, the gradient in the activation metric.
inline Vec feature_drift(const HopfieldNet& net, const Vec& v) {
    Vec g = hopfield_energy_gradient(net, v);
    for (Eigen::Index i = 0; i < v.size(); ++i) g[i] *= -activation::slope_at_output(net.act, v[i]);
    return g;
}

/// Feature-state landscape on the open cube with an inner margin.
inline Landscape hopfield_landscape(const HopfieldNet& net, double margin = 1e-6) {
    const int n = net.size();
    auto shared = std::make_shared<const HopfieldNet>(net);
    Potential p;
    p.form = PotentialForm::hopfield_energy;
    p.dimension = n;
    // Flattened params: [N, activation (0 tanh, 1 sigmoid), W row-major, B, Rinv].
    p.params.push_back(n);
    p.params.push_back(net.act == Activation::tanh ? 0.0 : 1.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) p.params.push_back(net.W(i, j));
    for (int i = 0; i < n; ++i) p.params.push_back(net.B[i]);
    for (int i = 0; i < n; ++i) p.params.push_back(net.Rinv[i]);
    // Formula evaluation outside the cube yields NaN rather than an exception,
    // so integrators can treat it as a rejected step.
    auto inside = [shared](const Vec& v) {
        for (Eigen::Index i = 0; i < v.size(); ++i)
            if (!activation::in_range(shared->act, v[i])) return false;
        return true;
    };
    const double nan = std::numeric_limits<double>::quiet_NaN();
    p.value_fn = [shared, inside, nan](const Vec& v) { return inside(v) ? hopfield_energy(*shared, v) : nan; };
    p.gradient_fn = [shared, inside, nan](const Vec& v) {
        return inside(v) ? hopfield_energy_gradient(*shared, v) : Vec(Vec::Constant(v.size(), nan));
    };
    p.hessian_fn = [shared, inside, nan](const Vec& v) {
        return inside(v) ? hopfield_energy_hessian(*shared, v) : Mat(Mat::Constant(v.size(), v.size(), nan));
    };
    Metric g{MetricForm::activation_diagonal, {net.act == Activation::tanh ? 0.0 : 1.0}};
    Domain d;
    d.dimension = n;
    d.shape = DomainShape::box;
    d.box_lower = activation::lower(net.act);
    d.box_upper = activation::upper(net.act);
    d.margin = margin;
    return Landscape(std::move(p), std::move(g), std::move(d));
}

/// Inverse of the params encoding used by hopfield_landscape.
inline HopfieldNet hopfield_from_params(const std::vector<double>& params) {
    if (params.size() < 2) throw ConfigError("hopfield params are too short");
    const auto n = static_cast<Eigen::Index>(params[0]);
    if (n < 1 || params.size() != static_cast<std::size_t>(2 + n * n + 2 * n))
        throw ConfigError("hopfield params length does not match the network size");
    Mat W(n, n);
    std::size_t k = 2;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) W(i, j) = params[k++];
    Vec B(n), R(n);
    for (Eigen::Index i = 0; i < n; ++i) B[i] = params[k++];
    for (Eigen::Index i = 0; i < n; ++i) R[i] = params[k++];
    return make_hopfield(std::move(W), std::move(R), params[1] != 0.0 ? Activation::sigmoid : Activation::tanh,
                         std::move(B));
}

/// Moves a point strictly inside the activation range by `inset`.
inline Vec clip_to_range(const HopfieldNet& net, Vec v, double inset = 1e-3) {
    const double lo = activation::lower(net.act) + inset, hi = activation::upper(net.act) - inset;
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = std::clamp(v[i], lo, hi);
    return v;
}

struct RecallResult {
    Vec point;
    double time = 0.0;
    bool reached_boundary = false;  // trajectory ran into the cube face (Rinv = 0 corners)
};

/// Follows the feature dynamics until |drift| < drift_tol. Throws
/// TimeoutError when t_max is reached first.
inline RecallResult recall(const HopfieldNet& net, const Vec& v0, double dt = 0.01, double t_max = 1e4,
                           double drift_tol = 1e-9) {
    detail::check_feature_state(net, v0);
    const Landscape land = hopfield_landscape(net);
    FlowOptions opt;
    opt.dt = dt;
    opt.t_max = t_max;
    opt.drift_tol = drift_tol;
    RecallResult r;
    try {
        FlowResult fr = integrate_with(land, land.contains(v0) ? v0 : clip_to_range(net, v0, 2e-6), opt,
                                       [](double, const Vec&, double) { return true; });
        if (fr.status != FlowStatus::converged)
            throw TimeoutError("recall did not settle by t = " + std::to_string(t_max));
        r.point = fr.point;
        r.time = fr.time;
    } catch (const IntegrationError& e) {
        r.point = e.exit_point();
        r.reached_boundary = true;
    }
    return r;
}

inline Vec sign_pattern(const Vec& v, double centre = 0.0) {
    Vec s(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) s[i] = v[i] >= centre ? 1.0 : -1.0;
    return s;
}

// ---------------------------------------------------------------------------
// Structural stability
// ---------------------------------------------------------------------------

struct HopfieldFixedPoint {
    Vec u;  // hidden state
    Vec v;  // feature state
    Vec hessian_eigenvalues;
    double min_abs_eigenvalue = 0.0;
    int index = 0;
};

struct StabilityReport {
    bool weight_test = false;  // true when every Rinv is zero and the test is on W alone
    Vec weight_eigenvalues;
    std::vector<HopfieldFixedPoint> fixed_points;
    double min_abs_eigenvalue = std::numeric_limits<double>::infinity();
    double threshold = 1e-8;
    bool structurally_stable = false;

    std::string verdict() const { return structurally_stable ? "structurally stable" : "not structurally stable"; }
};

/// Zero-resistance test: the network is not structurally stable when W has
/// an eigenvalue of magnitude below the threshold. Accepts any symmetric W.
inline StabilityReport weight_rank_check(const Mat& W, double threshold = 1e-8) {
    if (W.rows() != W.cols()) throw ConfigError("weight matrix must be square");
    StabilityReport r;
    r.weight_test = true;
    r.threshold = threshold;
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (W + W.transpose()), Eigen::EigenvaluesOnly);
    r.weight_eigenvalues = es.eigenvalues();
    r.min_abs_eigenvalue = r.weight_eigenvalues.cwiseAbs().minCoeff();
    r.structurally_stable = r.min_abs_eigenvalue >= threshold;
    return r;
}

struct StabilityOptions {
    double threshold = 1e-8;
    int random_seeds = 64;
    std::uint64_t seed = 0;
    double newton_tol = 1e-12;
    int max_iterations = 100;
    double merge_radius = 1e-6;
};

namespace detail {

/// Damped Newton on W f(u) - B - Rinv u = 0.
inline std::optional<Vec> hidden_fixed_point(const HopfieldNet& net, Vec u, const StabilityOptions& opt) {
    const auto n = u.size();
    Vec F = hidden_drift(net, u);
    for (int it = 0; it < opt.max_iterations; ++it) {
        if (F.norm() < opt.newton_tol) return u;
        Mat J = -Mat(net.Rinv.asDiagonal());
        for (Eigen::Index j = 0; j < n; ++j) J.col(j) += net.W.col(j) * activation::f_prime(net.act, u[j]);
        Vec step = J.fullPivLu().solve(-F);
        if (!step.allFinite()) return std::nullopt;
        double alpha = 1.0;
        bool ok = false;
        for (int k = 0; k < 40; ++k, alpha *= 0.5) {
            Vec un = u + alpha * step;
            Vec Fn = hidden_drift(net, un);
            if (Fn.allFinite() && Fn.norm() < F.norm()) {
                u = std::move(un);
                F = std::move(Fn);
                ok = true;
                break;
            }
        }
        if (!ok) break;
    }
    if (F.norm() < opt.newton_tol * 1e3) return u;
    return std::nullopt;
}

}  // namespace detail

/// Hessian limit -W + diag(Rinv / f'(u*)) at a hidden fixed point.
inline Mat hessian_limit(const HopfieldNet& net, const Vec& u) {
    Mat H = -net.W;
    for (Eigen::Index i = 0; i < u.size(); ++i) H(i, i) += net.Rinv[i] / activation::f_prime(net.act, u[i]);
    return H;
}

/// With all Rinv = 0 the verdict comes from the eigenvalues of W. Otherwise
/// hidden fixed points are located by Newton from the supplied patterns and
/// random seeds, and the verdict comes from the Hessian limits there.
inline StabilityReport stability_check(const HopfieldNet& net, const std::vector<Vec>& patterns = {},
                                       const StabilityOptions& opt = {}) {
    if ((net.Rinv.array() == 0.0).all()) return weight_rank_check(net.W, opt.threshold);
    StabilityReport r;
    r.threshold = opt.threshold;
    const int n = net.size();
    const double lo = activation::lower(net.act), hi = activation::upper(net.act);
    std::vector<Vec> seeds;
    for (const auto& p : patterns) {
        if (p.size() != n) throw InputError("pattern length does not match the network size");
        Vec v = clip_to_range(net, p, 1e-3);
        Vec u(n);
        for (int i = 0; i < n; ++i) u[i] = activation::inverse(net.act, v[i]);
        seeds.push_back(std::move(u));
    }
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> uni(lo + 1e-3, hi - 1e-3);
    seeds.push_back(Vec::Zero(n));
    for (int s = 0; s < opt.random_seeds; ++s) {
        Vec u(n);
        for (int i = 0; i < n; ++i) u[i] = activation::inverse(net.act, uni(rng));
        seeds.push_back(std::move(u));
    }
    std::vector<std::optional<Vec>> found(seeds.size());
    parallel_for(seeds.size(), [&](std::size_t k) { found[k] = detail::hidden_fixed_point(net, seeds[k], opt); });
    for (const auto& fu : found) {
        if (!fu) continue;
        Vec v(n);
        for (int i = 0; i < n; ++i) v[i] = activation::f(net.act, (*fu)[i]);
        bool dup = false;
        for (const auto& fp : r.fixed_points)
            if ((fp.v - v).norm() < opt.merge_radius) dup = true;
        if (dup) continue;
        HopfieldFixedPoint fp;
        fp.u = *fu;
        fp.v = v;
        Eigen::SelfAdjointEigenSolver<Mat> es(hessian_limit(net, *fu), Eigen::EigenvaluesOnly);
        fp.hessian_eigenvalues = es.eigenvalues();
        fp.min_abs_eigenvalue = fp.hessian_eigenvalues.cwiseAbs().minCoeff();
        fp.index = static_cast<int>((fp.hessian_eigenvalues.array() < 0.0).count());
        r.min_abs_eigenvalue = std::min(r.min_abs_eigenvalue, fp.min_abs_eigenvalue);
        r.fixed_points.push_back(std::move(fp));
    }
    r.structurally_stable = !r.fixed_points.empty() && r.min_abs_eigenvalue >= opt.threshold;
    return r;
}

struct ClampResult {
    Mat W;
    double distance = 0.0;  // Frobenius distance to the input
};

/// Raises every eigenvalue below eps to eps. The result is full rank and
/// exactly symmetric.
inline ClampResult clamp_eigenvalues(const Mat& W, double eps) {
    if (W.rows() != W.cols()) throw ConfigError("weight matrix must be square");
    if ((W - W.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, W.cwiseAbs().maxCoeff()))
        throw ConfigError("weight matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (W + W.transpose()));
    Vec lam = es.eigenvalues();
    double d2 = 0.0;
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        if (lam[i] < eps) {
            d2 += (lam[i] - eps) * (lam[i] - eps);
            lam[i] = eps;
        }
    }
    ClampResult r;
    const Mat& Q = es.eigenvectors();
    Mat Wb = Q * lam.asDiagonal() * Q.transpose();
    r.W = 0.5 * (Wb + Wb.transpose());
    r.distance = std::sqrt(d2);
    return r;
}

// ---------------------------------------------------------------------------
// Hebbian learning
// ---------------------------------------------------------------------------

/// (1/M) sum xi xi^T with the diagonal removed. Patterns are rows.
inline Mat outer_product_rule(const Mat& patterns) {
    if (patterns.rows() == 0) throw InputError("no patterns");
    Mat W = patterns.transpose() * patterns / static_cast<double>(patterns.rows());
    W.diagonal().setZero();
    return W;
}

struct HebbianOptions {
    double rate = 0.1;
    double c = 1.0;
    double tol = 1e-12;
    std::uint64_t seed = 0;
    std::size_t max_iterations = 1000000;
};

struct HebbianResult {
    Mat W;
    std::size_t iterations = 0;
    std::vector<Mat> history;  // W after each outer iteration when requested
};

/// Projected gradient descent on -1/2 sum xi^T W xi subject to |W|_F <= c.
/// Patterns are rows. The diagonal is cleared after the Hebbian increments
/// and again after the projection, so the iterate always defines a valid
/// network and the fixed point is exactly c times the unit-norm solution.
inline HebbianResult hebbian_pgd(const Mat& patterns, const HebbianOptions& opt = {}, bool keep_history = false) {
    if (patterns.rows() == 0 || patterns.cols() == 0) throw InputError("no patterns");
    if (!(opt.rate > 0.0) || !(opt.c > 0.0) || !(opt.tol > 0.0)) throw InputError("rate, c and tol must be positive");
    if (!patterns.allFinite()) throw InputError("patterns contain non-finite entries");
    const auto n = patterns.cols();
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Mat W(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) W(i, j) = uni(rng);
    W = 0.5 * (W + W.transpose());
    W.diagonal().setZero();
    auto project = [&](Mat& M) {
        const double fn = M.norm();
        if (fn > opt.c) M *= opt.c / fn;
        M.diagonal().setZero();
    };
    project(W);

    HebbianResult r;
    for (std::size_t it = 0; it < opt.max_iterations; ++it) {
        const Mat prev = W;
        for (Eigen::Index m = 0; m < patterns.rows(); ++m) {
            const Vec xi = patterns.row(m).transpose();
            W += opt.rate * xi * xi.transpose();
        }
        W.diagonal().setZero();
        project(W);
        r.iterations = it + 1;
        if (keep_history) r.history.push_back(W);
        if ((W - prev).norm() < opt.tol) {
            // Symmetric up to rounding; make it exact.
            r.W = 0.5 * (W + W.transpose());
            return r;
        }
    }
    throw TimeoutError("Hebbian projected gradient descent did not converge in " +
                       std::to_string(opt.max_iterations) + " iterations");
}

/// Cosine similarity of two matrices as flattened vectors.
inline double matrix_cosine(const Mat& a, const Mat& b) {
    const double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return (a.array() * b.array()).sum() / (na * nb);
}

// ---------------------------------------------------------------------------
// Modern (dense) network
// ---------------------------------------------------------------------------

/// Patterns are the columns of Xi (d x M).
struct ModernHopfield {
    Mat Xi;
    double beta = 1.0;

    int dimension() const { return static_cast<int>(Xi.rows()); }
    int patterns() const { return static_cast<int>(Xi.cols()); }
    double C() const { return Xi.colwise().norm().maxCoeff(); }
};

inline ModernHopfield make_modern_hopfield(Mat Xi, double beta) {
    if (Xi.rows() < 1 || Xi.cols() < 1) throw ConfigError("pattern matrix is empty");
    if (Xi.rows() > max_dimension) throw ConfigError("pattern dimension larger than supported");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be positive");
    if (!Xi.allFinite()) throw ConfigError("pattern matrix contains non-finite entries");
    return ModernHopfield{std::move(Xi), beta};
}

/// Softmax with max subtraction.
inline Vec softmax(const Vec& z) {
    const double m = z.maxCoeff();
    Vec e = (z.array() - m).exp().matrix();
    return e / e.sum();
}

inline Vec mh_probabilities(const ModernHopfield& m, const Vec& v) {
    if (v.size() != m.dimension()) throw DomainError("state has the wrong length");
    return softmax(m.beta * (m.Xi.transpose() * v));
}

/// v -> Xi softmax(beta Xi^T v).
inline Vec mh_update(const ModernHopfield& m, const Vec& v) { return m.Xi * mh_probabilities(m, v); }

/// beta Xi (diag p - p p^T) Xi^T.
inline Mat mh_jacobian(const ModernHopfield& m, const Vec& v) {
    const Vec p = mh_probabilities(m, v);
    Mat Js = Mat(p.asDiagonal()) - p * p.transpose();
    Mat J = m.beta * m.Xi * Js * m.Xi.transpose();
    return 0.5 * (J + J.transpose());
}

/// -lse(beta, Xi^T v) + v.v/2 + log(M)/beta + C^2/2.
inline double mh_energy(const ModernHopfield& m, const Vec& v) {
    if (v.size() != m.dimension()) throw DomainError("state has the wrong length");
    const Vec z = m.beta * (m.Xi.transpose() * v);
    const double zmax = z.maxCoeff();
    const double lse = (zmax + std::log((z.array() - zmax).exp().sum())) / m.beta;
    const double C = m.C();
    return -lse + 0.5 * v.squaredNorm() + std::log(static_cast<double>(m.patterns())) / m.beta + 0.5 * C * C;
}

inline Vec mh_energy_gradient(const ModernHopfield& m, const Vec& v) { return v - mh_update(m, v); }

/// Gradient-flow variant on the full energy, on the disc of radius C + margin.
inline Landscape modern_hopfield_landscape(const ModernHopfield& m, double margin = 0.5) {
    auto shared = std::make_shared<const ModernHopfield>(m);
    Potential p;
    p.form = PotentialForm::modern_hopfield_energy;
    p.dimension = m.dimension();
    // Flattened params: [d, M, beta, Xi column-major].
    p.params = {static_cast<double>(m.dimension()), static_cast<double>(m.patterns()), m.beta};
    for (Eigen::Index j = 0; j < m.Xi.cols(); ++j)
        for (Eigen::Index i = 0; i < m.Xi.rows(); ++i) p.params.push_back(m.Xi(i, j));
    p.value_fn = [shared](const Vec& v) { return mh_energy(*shared, v); };
    p.gradient_fn = [shared](const Vec& v) { return mh_energy_gradient(*shared, v); };
    p.hessian_fn = [shared](const Vec& v) {
        const auto d = v.size();
        return Mat(Mat::Identity(d, d) - mh_jacobian(*shared, v));
    };
    return Landscape(std::move(p), Metric{}, disc(m.dimension(), m.C() + margin));
}

inline ModernHopfield modern_hopfield_from_params(const std::vector<double>& params) {
    if (params.size() < 3) throw ConfigError("modern hopfield params are too short");
    const auto d = static_cast<Eigen::Index>(params[0]);
    const auto M = static_cast<Eigen::Index>(params[1]);
    if (d < 1 || M < 1 || params.size() != static_cast<std::size_t>(3 + d * M))
        throw ConfigError("modern hopfield params length does not match d and M");
    Mat Xi(d, M);
    std::size_t k = 3;
    for (Eigen::Index j = 0; j < M; ++j)
        for (Eigen::Index i = 0; i < d; ++i) Xi(i, j) = params[k++];
    return make_modern_hopfield(std::move(Xi), params[2]);
}

/// Numeric rank: singular values above tol.
inline int numeric_rank(const Mat& A, double tol = 1e-8) {
    if (A.size() == 0) return 0;
    Eigen::JacobiSVD<Mat> svd(A);
    return static_cast<int>((svd.singularValues().array() > tol).count());
}

struct MhFixedPointCheck {
    Vec point;
    double min_singular_value = 0.0;
    bool degenerate = false;
};

struct MhRankReport {
    int M = 0, d = 0, rank_xi = 0;
    bool necessary_ok = false;  // at least d + 1 patterns, d of them independent
    std::vector<MhFixedPointCheck> fixed_points;
};

inline MhRankReport mh_rank_check(const ModernHopfield& m, const std::vector<Vec>& fixed_points = {}) {
    MhRankReport r;
    r.M = m.patterns();
    r.d = m.dimension();
    r.rank_xi = numeric_rank(m.Xi);
    r.necessary_ok = r.M >= r.d + 1 && r.rank_xi == r.d;
    for (const auto& x : fixed_points) {
        MhFixedPointCheck c;
        c.point = x;
        const Mat A = Mat::Identity(r.d, r.d) - mh_jacobian(m, x);
        Eigen::JacobiSVD<Mat> svd(A);
        c.min_singular_value = svd.singularValues().minCoeff();
        c.degenerate = c.min_singular_value < 1e-8;
        r.fixed_points.push_back(std::move(c));
    }
    return r;
}

struct MhIterationResult {
    Vec point;
    int iterations = 0;
    bool converged = false;
};

inline MhIterationResult mh_iterate(const ModernHopfield& m, Vec v, double tol = 1e-10, int max_iterations = 100000) {
    MhIterationResult r;
    for (int it = 0; it < max_iterations; ++it) {
        Vec next = mh_update(m, v);
        const double step = (next - v).norm();
        v = std::move(next);
        r.iterations = it + 1;
        if (step < tol) {
            r.converged = true;
            break;
        }
    }
    r.point = std::move(v);
    return r;
}

struct MhCensus {
    double beta = 0.0;
    std::vector<Vec> attractors;
    std::vector<int> basin_counts;  // seeds ending at each attractor
    int dropped = 0;                // seeds that did not converge
};

/// Seeds covering the disc of radius C: the patterns plus Halton points.
inline std::vector<Vec> mh_default_seeds(const ModernHopfield& m, std::size_t count = 400) {
    const int d = m.dimension();
    const double C = m.C();
    std::vector<Vec> seeds;
    for (Eigen::Index j = 0; j < m.Xi.cols(); ++j) seeds.push_back(m.Xi.col(j));
    for (std::size_t k = 0; seeds.size() < count + static_cast<std::size_t>(m.patterns()) && k < 100 * count; ++k) {
        Vec x = (C * (2.0 * halton(k, d).array() - 1.0)).matrix();
        if (x.norm() <= C) seeds.push_back(std::move(x));
    }
    return seeds;
}

/// Fixed-point iteration from every seed at each beta; terminal points are
/// clustered at radius 1e-4.
inline std::vector<MhCensus> mh_attractor_census(const ModernHopfield& m, const std::vector<double>& betas,
                                                 const std::vector<Vec>& seeds, double tol = 1e-10,
                                                 double cluster_radius = 1e-4) {
    std::vector<MhCensus> out;
    for (double beta : betas) {
        ModernHopfield mb = make_modern_hopfield(m.Xi, beta);
        std::vector<MhIterationResult> runs(seeds.size());
        parallel_for(seeds.size(), [&](std::size_t k) { runs[k] = mh_iterate(mb, seeds[k], tol); });
        MhCensus c;
        c.beta = beta;
        for (const auto& run : runs) {
            if (!run.converged) {
                ++c.dropped;
                continue;
            }
            bool placed = false;
            for (std::size_t a = 0; a < c.attractors.size() && !placed; ++a) {
                if ((c.attractors[a] - run.point).norm() < cluster_radius) {
                    ++c.basin_counts[a];
                    placed = true;
                }
            }
            if (!placed) {
                c.attractors.push_back(run.point);
                c.basin_counts.push_back(1);
            }
        }
        out.push_back(std::move(c));
    }
    return out;
}

namespace builtin {

/// Three patterns in the plane: (0.95, delta), (-0.7, sqrt3/2), (0.7, sqrt3/2).
inline Mat triangle_patterns(double delta = 0.0) {
    Mat Xi(2, 3);
    Xi << 0.95, -0.7, 0.7, delta, std::sqrt(3.0) / 2.0, std::sqrt(3.0) / 2.0;
    return Xi;
}

}  // namespace builtin

}  // namespace morseland

#endif
