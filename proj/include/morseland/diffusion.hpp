#ifndef MORSELAND_DIFFUSION_HPP
#define MORSELAND_DIFFUSION_HPP

#include "morseland/bifurcation.hpp"
#include "morseland/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace morseland {

// ---------------------------------------------------------------------------
// Data and schedules
// ---------------------------------------------------------------------------

/// Isotropic Gaussian mixture: equal per-component standard deviation sigma0.
struct GmmData {
    std::vector<Vec> centroids;
    Vec weights;
    double sigma0 = 0.1;

    int dimension() const { return centroids.empty() ? 0 : static_cast<int>(centroids.front().size()); }
    std::size_t components() const { return centroids.size(); }
    double max_centroid_norm() const {
        double r = 0.0;
        for (const auto& c : centroids) r = std::max(r, c.norm());
        return r;
    }
};

/// Weights default to uniform.
inline GmmData make_gmm(std::vector<Vec> centroids, double sigma0, Vec weights = Vec()) {
    if (centroids.empty()) throw ConfigError("mixture needs at least one centroid");
    const auto d = centroids.front().size();
    if (d < 1 || d > max_dimension) throw ConfigError("centroid dimension out of range");
    for (const auto& c : centroids)
        if (c.size() != d || !c.allFinite()) throw ConfigError("centroids must be finite and of equal dimension");
    if (!(sigma0 > 0.0)) throw ConfigError("sigma0 must be positive");
    const auto k = static_cast<Eigen::Index>(centroids.size());
    if (weights.size() == 0) weights = Vec::Constant(k, 1.0 / static_cast<double>(k));
    if (weights.size() != k) throw ConfigError("weights length does not match the number of centroids");
    if ((weights.array() < 0.0).any() || std::abs(weights.sum() - 1.0) > 1e-12)
        throw ConfigError("weights must be nonnegative and sum to 1");
    return GmmData{std::move(centroids), std::move(weights), sigma0};
}

enum class ScheduleKind { vp, subvp, ve };

inline std::string_view to_string(ScheduleKind k) {
    switch (k) {
        case ScheduleKind::vp: return "VP";
        case ScheduleKind::subvp: return "subVP";
        case ScheduleKind::ve: return "VE";
    }
    return "unknown";
}

inline ScheduleKind schedule_kind_from_string(std::string_view s) {
    if (s == "VP" || s == "vp") return ScheduleKind::vp;
    if (s == "subVP" || s == "subvp") return ScheduleKind::subvp;
    if (s == "VE" || s == "ve") return ScheduleKind::ve;
    throw ConfigError("unknown schedule kind '" + std::string(s) + "'");
}

/// Linear schedule beta_t = beta_min + t (beta_max - beta_min) on [0, 1].
/// For VE the two numbers are the end noise scales of the geometric
/// sigma(t) = beta_min (beta_max / beta_min)^t.
struct NoiseSchedule {
    ScheduleKind kind = ScheduleKind::vp;
    double beta_min = 0.1;
    double beta_max = 20.0;

    void check_time(double t) const {
        if (!(t >= 0.0 && t <= 1.0)) throw DomainError("time " + std::to_string(t) + " outside [0, 1]");
    }

    double beta(double t) const { return beta_min + t * (beta_max - beta_min); }
    double beta_integral(double t) const { return beta_min * t + 0.5 * t * t * (beta_max - beta_min); }
    double ve_sigma(double t) const { return beta_min * std::pow(beta_max / beta_min, t); }

    /// Noise intensity eps_t multiplying dw_t under the square root.
    double noise(double t) const {
        switch (kind) {
            case ScheduleKind::vp: return beta(t);
            case ScheduleKind::subvp: return beta(t) * (1.0 - std::exp(-2.0 * beta_integral(t)));
            case ScheduleKind::ve: {
                const double s = ve_sigma(t);
                return 2.0 * s * s * std::log(beta_max / beta_min);
            }
        }
        return 0.0;
    }

    /// Linear drift rate: dx = -rate x dt + sqrt(eps) dw.
    double drift_rate(double t) const { return kind == ScheduleKind::ve ? 0.0 : 0.5 * beta(t); }
};

inline NoiseSchedule make_schedule(ScheduleKind kind, double beta_min, double beta_max) {
    if (!(beta_min > 0.0) || !(beta_max > 0.0)) throw ConfigError("schedule endpoints must be positive");
    if (kind == ScheduleKind::ve && beta_max < beta_min) throw ConfigError("VE needs sigma_max >= sigma_min");
    return NoiseSchedule{kind, beta_min, beta_max};
}

struct MarginalParams {
    double mean_scale = 1.0;
    double added_variance = 0.0;
};

inline MarginalParams marginal_params(const NoiseSchedule& s, double t) {
    s.check_time(t);
    MarginalParams p;
    switch (s.kind) {
        case ScheduleKind::vp:
            p.mean_scale = std::exp(-0.5 * s.beta_integral(t));
            p.added_variance = -std::expm1(-s.beta_integral(t));
            break;
        case ScheduleKind::subvp: {
            p.mean_scale = std::exp(-0.5 * s.beta_integral(t));
            const double a = -std::expm1(-s.beta_integral(t));
            p.added_variance = a * a;
            break;
        }
        case ScheduleKind::ve: {
            const double s0 = s.ve_sigma(0.0), st = s.ve_sigma(t);
            p.mean_scale = 1.0;
            p.added_variance = st * st - s0 * s0;
            break;
        }
    }
    return p;
}

/// Per-component variance of the time-t marginal.
inline double component_variance(const GmmData& d, const NoiseSchedule& s, double t) {
    const MarginalParams mp = marginal_params(s, t);
    const double shrink = s.kind == ScheduleKind::ve ? 1.0 : mp.mean_scale * mp.mean_scale;
    return d.sigma0 * d.sigma0 * shrink + mp.added_variance;
}

// ---------------------------------------------------------------------------
// Marginal density and score
// ---------------------------------------------------------------------------

struct LogMarginal {
    double log_p = 0.0;
    Vec score;
    Vec responsibilities;
};

inline LogMarginal log_marginal_and_score(const GmmData& d, const NoiseSchedule& s, double t, const Vec& x) {
    const MarginalParams mp = marginal_params(s, t);
    const double var = component_variance(d, s, t);
    const auto n = x.size();
    if (n != d.dimension()) throw DomainError("point has the wrong dimension");
    const auto K = static_cast<Eigen::Index>(d.components());
    Vec logs(K);
    for (Eigen::Index k = 0; k < K; ++k) {
        const double r2 = (x - mp.mean_scale * d.centroids[k]).squaredNorm();
        logs[k] = (d.weights[k] > 0.0 ? std::log(d.weights[k]) : -std::numeric_limits<double>::infinity()) -
                  0.5 * r2 / var;
    }
    const double mx = logs.maxCoeff();
    const Vec w = (logs.array() - mx).exp().matrix();
    const double sw = w.sum();
    LogMarginal out;
    out.log_p = mx + std::log(sw) - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi * var);
    out.responsibilities = w / sw;
    out.score = Vec::Zero(n);
    for (Eigen::Index k = 0; k < K; ++k)
        out.score += out.responsibilities[k] * (mp.mean_scale * d.centroids[k] - x) / var;
    return out;
}

/// Hessian of log p_t: sum_k g_k (d_k d_k^T - I / var) - s s^T, d_k the
/// per-component score.
inline Mat log_marginal_hessian(const GmmData& d, const NoiseSchedule& s, double t, const Vec& x) {
    const MarginalParams mp = marginal_params(s, t);
    const double var = component_variance(d, s, t);
    const LogMarginal lm = log_marginal_and_score(d, s, t, x);
    const auto n = x.size();
    Mat H = -Mat::Identity(n, n) / var;
    for (std::size_t k = 0; k < d.components(); ++k) {
        const Vec dk = (mp.mean_scale * d.centroids[k] - x) / var;
        H += lm.responsibilities[static_cast<Eigen::Index>(k)] * dk * dk.transpose();
    }
    H -= lm.score * lm.score.transpose();
    return H;
}

// ---------------------------------------------------------------------------
// Probability flow and the time-varying potential
// ---------------------------------------------------------------------------

/// V_t(x) = beta_t |x|^2 / 4 + eps_t log p_t(x) / 2; VE drops the quadratic term.
inline double time_potential(const GmmData& d, const NoiseSchedule& s, double t, const Vec& x) {
    const double q = s.kind == ScheduleKind::ve ? 0.0 : 0.25 * s.beta(t) * x.squaredNorm();
    return q + 0.5 * s.noise(t) * log_marginal_and_score(d, s, t, x).log_p;
}

inline Vec time_potential_gradient(const GmmData& d, const NoiseSchedule& s, double t, const Vec& x) {
    Vec g = 0.5 * s.noise(t) * log_marginal_and_score(d, s, t, x).score;
    if (s.kind != ScheduleKind::ve) g += 0.5 * s.beta(t) * x;
    return g;
}

inline Mat time_potential_hessian(const GmmData& d, const NoiseSchedule& s, double t, const Vec& x) {
    Mat H = 0.5 * s.noise(t) * log_marginal_hessian(d, s, t, x);
    if (s.kind != ScheduleKind::ve) H.diagonal().array() += 0.5 * s.beta(t);
    return H;
}

/// Forward-time probability flow dx/dt = -grad V_t. Generation integrates it
/// from t = 1 down to 0.
inline Vec probability_flow_drift(const GmmData& d, const NoiseSchedule& s, double t, const Vec& x) {
    return -time_potential_gradient(d, s, t, x);
}

/// Landscape of the generation dynamics at time t. Running the probability
/// flow backward in time is the gradient flow of -V_t, so the potential here
/// is -V_t: data modes are its attractors.
inline Landscape generation_landscape(const GmmData& d, const NoiseSchedule& s, double t) {
    s.check_time(t);
    auto data = std::make_shared<const GmmData>(d);
    Potential p;
    p.form = PotentialForm::gmm_diffusion;
    p.dimension = d.dimension();
    // Flattened params: [t, kind, beta_min, beta_max, sigma0, K, weights..., centroids...].
    p.params = {t, static_cast<double>(static_cast<int>(s.kind)), s.beta_min, s.beta_max, d.sigma0,
                static_cast<double>(d.components())};
    for (Eigen::Index k = 0; k < d.weights.size(); ++k) p.params.push_back(d.weights[k]);
    for (const auto& c : d.centroids)
        for (Eigen::Index i = 0; i < c.size(); ++i) p.params.push_back(c[i]);
    p.value_fn = [data, s, t](const Vec& x) { return -time_potential(*data, s, t, x); };
    p.gradient_fn = [data, s, t](const Vec& x) { return Vec(-time_potential_gradient(*data, s, t, x)); };
    p.hessian_fn = [data, s, t](const Vec& x) { return Mat(-time_potential_hessian(*data, s, t, x)); };
    const double radius = std::max(3.0, 2.0 * d.max_centroid_norm());
    return Landscape(std::move(p), Metric{}, disc(d.dimension(), radius));
}

struct GmmSpec {
    GmmData data;
    NoiseSchedule schedule;
    double t = 1.0;
};

/// Inverse of the params encoding used by generation_landscape.
inline GmmSpec gmm_from_params(int dimension, const std::vector<double>& params) {
    if (params.size() < 6) throw ConfigError("gmm params are too short");
    const auto K = static_cast<std::size_t>(params[5]);
    if (K < 1 || params.size() != 6 + K + K * static_cast<std::size_t>(dimension))
        throw ConfigError("gmm params length does not match K and dimension");
    const int kind = static_cast<int>(params[1]);
    if (kind < 0 || kind > 2) throw ConfigError("unknown schedule kind code");
    Vec w(static_cast<Eigen::Index>(K));
    std::size_t k = 6;
    for (std::size_t i = 0; i < K; ++i) w[static_cast<Eigen::Index>(i)] = params[k++];
    std::vector<Vec> cs;
    for (std::size_t i = 0; i < K; ++i) {
        Vec c(dimension);
        for (int j = 0; j < dimension; ++j) c[j] = params[k++];
        cs.push_back(std::move(c));
    }
    GmmSpec out;
    out.data = make_gmm(std::move(cs), params[4], std::move(w));
    out.schedule = make_schedule(static_cast<ScheduleKind>(kind), params[2], params[3]);
    out.t = params[0];
    out.schedule.check_time(out.t);
    return out;
}

/// One-parameter family in backward time eta = 1 - t.
inline ParameterFamily time_potential_family(const GmmData& d, const NoiseSchedule& s) {
    return make_family([d, s](double eta) { return generation_landscape(d, s, 1.0 - eta); }, 0.0, 1.0,
                       "generation-potential");
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// Euler-Maruyama of the forward process from x0 over [0, t_end].
inline TrajectoryRecord forward_sde_sample(const NoiseSchedule& s, const Vec& x0, std::size_t steps,
                                          std::uint64_t seed, std::uint64_t stream = 0, double t_end = 1.0) {
    if (steps < 1) throw InputError("steps must be at least 1");
    s.check_time(t_end);
    auto rng = make_stream(seed, stream);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double h = t_end / static_cast<double>(steps);
    TrajectoryRecord rec;
    Vec x = x0;
    rec.push(0.0, x, 0.0);
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * h;
        const double sd = std::sqrt(s.noise(t) * h);
        Vec xn = x - s.drift_rate(t) * h * x;
        for (Eigen::Index i = 0; i < x.size(); ++i) xn[i] += sd * normal(rng);
        x = std::move(xn);
        rec.push(static_cast<double>(k + 1) * h, x, 0.0);
    }
    return rec;
}

/// Terminal points of n independent forward paths (stream i for path i).
inline std::vector<Vec> forward_terminal_samples(const NoiseSchedule& s, const Vec& x0, double t_end, std::size_t n,
                                                 std::size_t steps, std::uint64_t seed) {
    std::vector<Vec> out(n);
    parallel_for(n, [&](std::size_t i) { out[i] = forward_sde_sample(s, x0, steps, seed, i, t_end).points.back(); });
    return out;
}

/// Standard deviation of the sampling prior: 1 for VP, the t = 1 added
/// standard deviation otherwise.
inline double prior_scale(const NoiseSchedule& s) {
    if (s.kind == ScheduleKind::vp) return 1.0;
    return std::sqrt(marginal_params(s, 1.0).added_variance);
}

/// Reverse SDE dx = [-r_t x - eps_t score] dt + sqrt(eps_t) dw, run from
/// t = 1 to t = 0 on a uniform grid starting from prior draws.
inline std::vector<Vec> reverse_sde_sample(const GmmData& d, const NoiseSchedule& s, std::size_t n, std::size_t steps,
                                           std::uint64_t seed) {
    if (n < 1 || steps < 1) throw InputError("n and steps must be at least 1");
    const int dim = d.dimension();
    const double h = 1.0 / static_cast<double>(steps);
    const double prior = prior_scale(s);
    std::vector<Vec> out(n);
    parallel_for(n, [&](std::size_t i) {
        auto rng = make_stream(seed, i);
        std::normal_distribution<double> normal(0.0, 1.0);
        Vec x(dim);
        for (int j = 0; j < dim; ++j) x[j] = prior * normal(rng);
        for (std::size_t k = 0; k < steps; ++k) {
            const double t = 1.0 - static_cast<double>(k) * h;
            const double eps = s.noise(t);
            const Vec score = log_marginal_and_score(d, s, t, x).score;
            // Stepping backward: x(t - h) = x(t) - h * drift + noise.
            Vec xn = x + h * (s.drift_rate(t) * x + eps * score);
            const double sd = std::sqrt(eps * h);
            for (int j = 0; j < dim; ++j) xn[j] += sd * normal(rng);
            x = std::move(xn);
        }
        out[i] = std::move(x);
    });
    return out;
}

/// Exact draws from the time-t marginal.
inline std::vector<Vec> marginal_samples(const GmmData& d, const NoiseSchedule& s, double t, std::size_t n,
                                         std::uint64_t seed) {
    const MarginalParams mp = marginal_params(s, t);
    const double sd = std::sqrt(component_variance(d, s, t));
    std::vector<Vec> out(n);
    parallel_for(n, [&](std::size_t i) {
        auto rng = make_stream(seed, i);
        std::discrete_distribution<std::size_t> pick(d.weights.data(), d.weights.data() + d.weights.size());
        std::normal_distribution<double> normal(0.0, 1.0);
        Vec x = mp.mean_scale * d.centroids[pick(rng)];
        for (Eigen::Index j = 0; j < x.size(); ++j) x[j] += sd * normal(rng);
        out[i] = std::move(x);
    });
    return out;
}

/// RK4 on the probability flow from t_from down (or up) to t_to.
inline Vec probability_flow_transport(const GmmData& d, const NoiseSchedule& s, Vec x, double t_from, double t_to,
                                      std::size_t steps) {
    const double h = (t_to - t_from) / static_cast<double>(steps);
    double t = t_from;
    for (std::size_t k = 0; k < steps; ++k) {
        const Vec k1 = probability_flow_drift(d, s, t, x);
        const Vec k2 = probability_flow_drift(d, s, t + 0.5 * h, x + 0.5 * h * k1);
        const Vec k3 = probability_flow_drift(d, s, t + 0.5 * h, x + 0.5 * h * k2);
        const Vec k4 = probability_flow_drift(d, s, t + h, x + h * k3);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t = t_from + static_cast<double>(k + 1) * h;
    }
    return x;
}

struct MomentCheck {
    Vec empirical_mean, empirical_variance;
    Vec analytic_mean, analytic_variance;
    double max_mean_error = 0.0;      // relative to the analytic standard deviation
    double max_variance_error = 0.0;  // relative
    bool pass = false;
};

/// Per-axis mean and variance of the mixture marginal at time t.
inline void analytic_moments(const GmmData& d, const NoiseSchedule& s, double t, Vec& mean, Vec& var) {
    const MarginalParams mp = marginal_params(s, t);
    const int n = d.dimension();
    mean = Vec::Zero(n);
    Vec second = Vec::Zero(n);
    for (std::size_t k = 0; k < d.components(); ++k) {
        const double w = d.weights[static_cast<Eigen::Index>(k)];
        const Vec mu = mp.mean_scale * d.centroids[k];
        mean += w * mu;
        second += w * mu.cwiseProduct(mu);
    }
    var = second - mean.cwiseProduct(mean);
    var.array() += component_variance(d, s, t);
}

/// Pushes n exact t = 1 marginal draws back to time t_target along the
/// probability flow and compares per-axis moments with the analytic ones.
inline MomentCheck probability_flow_marginal_check(const GmmData& d, const NoiseSchedule& s, double t_target,
                                                   std::size_t n, std::size_t steps, std::uint64_t seed,
                                                   double tol = 0.03) {
    s.check_time(t_target);
    std::vector<Vec> xs = marginal_samples(d, s, 1.0, n, seed);
    parallel_for(n, [&](std::size_t i) { xs[i] = probability_flow_transport(d, s, xs[i], 1.0, t_target, steps); });
    MomentCheck r;
    const int dim = d.dimension();
    r.empirical_mean = Vec::Zero(dim);
    for (const auto& x : xs) r.empirical_mean += x;
    r.empirical_mean /= static_cast<double>(n);
    r.empirical_variance = Vec::Zero(dim);
    for (const auto& x : xs) r.empirical_variance += (x - r.empirical_mean).cwiseAbs2();
    r.empirical_variance /= static_cast<double>(n - 1);
    analytic_moments(d, s, t_target, r.analytic_mean, r.analytic_variance);
    for (int i = 0; i < dim; ++i) {
        const double sd = std::sqrt(r.analytic_variance[i]);
        r.max_mean_error = std::max(r.max_mean_error, std::abs(r.empirical_mean[i] - r.analytic_mean[i]) / sd);
        r.max_variance_error = std::max(r.max_variance_error, std::abs(r.empirical_variance[i] / r.analytic_variance[i] - 1.0));
    }
    r.pass = r.max_mean_error < tol && r.max_variance_error < tol;
    return r;
}

// ---------------------------------------------------------------------------
// Cluster summary of generated samples
// ---------------------------------------------------------------------------

struct ClusterSummary {
    std::vector<Vec> means;
    std::vector<double> occupancy;  // fraction of samples nearest to each centroid
    double max_mean_error = 0.0;
    double min_occupancy = 0.0;
};

inline ClusterSummary cluster_by_centroid(const GmmData& d, const std::vector<Vec>& samples) {
    const std::size_t K = d.components();
    ClusterSummary r;
    r.means.assign(K, Vec::Zero(d.dimension()));
    std::vector<std::size_t> counts(K, 0);
    for (const auto& x : samples) {
        std::size_t best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < K; ++k) {
            const double dd = (x - d.centroids[k]).squaredNorm();
            if (dd < bd) {
                bd = dd;
                best = k;
            }
        }
        r.means[best] += x;
        ++counts[best];
    }
    r.min_occupancy = 1.0;
    for (std::size_t k = 0; k < K; ++k) {
        const double frac = samples.empty() ? 0.0 : static_cast<double>(counts[k]) / static_cast<double>(samples.size());
        r.occupancy.push_back(frac);
        r.min_occupancy = std::min(r.min_occupancy, frac);
        if (counts[k]) {
            r.means[k] /= static_cast<double>(counts[k]);
            r.max_mean_error = std::max(r.max_mean_error, (r.means[k] - d.centroids[k]).norm());
        } else {
            r.max_mean_error = std::numeric_limits<double>::infinity();
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Backward-time cascade
// ---------------------------------------------------------------------------

struct CascadeReport {
    std::vector<double> etas;  // backward time 1 - t
    std::vector<int> attractor_counts;
    std::vector<int> saddle_counts;
    std::vector<int> repellor_counts;
    SweepResult sweep;
    EventReport events;
    int saddle_node_events = 0;
    bool nondecreasing = true;
};

/// Sweeps the generation landscape over `points` backward-time values in
/// [0, 1 - t_min] and locates the bifurcations between them.
inline CascadeReport diffusion_cascade(const GmmData& d, const NoiseSchedule& s, std::size_t points = 200,
                                       double t_min = 0.01, BifurcationOptions opt = {}) {
    if (points < 3) throw InputError("cascade needs at least 3 grid values");
    const ParameterFamily fam = time_potential_family(d, s);
    CascadeReport r;
    for (std::size_t i = 0; i < points; ++i)
        r.etas.push_back((1.0 - t_min) * static_cast<double>(i) / static_cast<double>(points - 1));
    r.sweep = sweep(fam, r.etas, opt);
    for (const auto& p : r.sweep.points) {
        r.attractor_counts.push_back(static_cast<int>(p.attractors()));
        r.saddle_counts.push_back(static_cast<int>(p.saddles()));
        r.repellor_counts.push_back(static_cast<int>(p.repellors()));
    }
    for (std::size_t i = 1; i < r.attractor_counts.size(); ++i)
        if (r.attractor_counts[i] < r.attractor_counts[i - 1]) r.nondecreasing = false;
    r.events = detect_events(fam, r.sweep, opt);
    for (const auto& e : r.events.events)
        if (e.kind == EventKind::saddle_node) ++r.saddle_node_events;
    return r;
}

namespace builtin {

/// Centroids at (+-1, +-1) with equal weights.
inline GmmData four_centroids(double sigma0 = 0.1) {
    std::vector<Vec> cs;
    for (double a : {-1.0, 1.0})
        for (double b : {-1.0, 1.0}) cs.push_back(Vec(Eigen::Vector2d(a, b)));
    return make_gmm(std::move(cs), sigma0);
}

}  // namespace builtin

}  // namespace morseland

#endif
