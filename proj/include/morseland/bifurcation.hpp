#ifndef MORSELAND_BIFURCATION_HPP
#define MORSELAND_BIFURCATION_HPP

#include "morseland/connectome.hpp"
#include "morseland/critical.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace morseland {

/// A k-parameter family of landscapes (k = 1 or 2) over a parameter box.
struct ParameterFamily {
    std::function<Landscape(const Vec&)> builder;
    int arity = 1;
    Vec lower, upper;
    std::string name;

    Landscape operator()(const Vec& eta) const { return builder(eta); }
    Landscape at(double eta) const { return builder(Vec::Constant(1, eta)); }
};

inline ParameterFamily make_family(std::function<Landscape(double)> build, double lo, double hi,
                                   std::string name = "") {
    ParameterFamily f;
    f.builder = [build = std::move(build)](const Vec& eta) { return build(eta[0]); };
    f.arity = 1;
    f.lower = Vec::Constant(1, lo);
    f.upper = Vec::Constant(1, hi);
    f.name = std::move(name);
    return f;
}

inline ParameterFamily make_family2(std::function<Landscape(double, double)> build, Vec lo, Vec hi,
                                    std::string name = "") {
    ParameterFamily f;
    f.builder = [build = std::move(build)](const Vec& eta) { return build(eta[0], eta[1]); };
    f.arity = 2;
    f.lower = std::move(lo);
    f.upper = std::move(hi);
    f.name = std::move(name);
    return f;
}

/// One-parameter slice eta(s) = base + s * dir of a family.
inline ParameterFamily restrict_family(const ParameterFamily& fam, const Vec& base, const Vec& dir, double lo,
                                       double hi) {
    auto parent = fam.builder;
    return make_family([parent, base, dir](double s) { return parent(base + s * dir); }, lo, hi, fam.name);
}

enum class EventKind { saddle_node, heteroclinic_flip, cusp_candidate };

inline std::string_view to_string(EventKind k) {
    switch (k) {
        case EventKind::saddle_node: return "saddle-node";
        case EventKind::heteroclinic_flip: return "heteroclinic-flip";
        case EventKind::cusp_candidate: return "cusp-candidate";
    }
    return "unknown";
}

struct BifurcationEvent {
    EventKind kind = EventKind::saddle_node;
    Vec value;  // located parameter value(s)
    double bracket_lo = 0.0, bracket_hi = 0.0;

    // saddle-node / cusp witness
    Vec point;
    double a = 0.0, b = 0.0;
    double a_reference = 0.0;
    double min_abs_eigenvalue = 0.0;
    bool generic = false;
    int count_before = 0, count_after = 0;
    double cubic = 0.0;

    // flip witness
    int saddle = -1;
    Vec saddle_location;
    std::vector<int> old_destinations, new_destinations;  // attractor ids at the bracket's low end
    std::vector<Vec> old_locations, new_locations;
    double approach = std::numeric_limits<double>::infinity();
    int approached_saddle = -1;

    double parameter() const { return value.size() ? value[0] : 0.0; }
};

struct BifurcationOptions {
    int grid_density = 24;
    CensusOptions census;
    SeparatrixOptions separatrix;
    bool build_dags = true;
    double perturbation = 1e-7;
    double bisection_tol = 1e-6;
    double generic_threshold = 1e-4;
    double witness_eigenvalue = 1e-5;
    double flip_witness = 1e-3;
    double fd_step_space = 1e-4;
    double fd_step_param = 1e-5;
};

// ---------------------------------------------------------------------------
// Normal forms at a degenerate point
// ---------------------------------------------------------------------------

struct KernelFrame {
    Vec right;  // unit kernel direction of g^{-1} H
    Vec left;   // left kernel vector with left . right = 1
    double eigenvalue = 0.0;
};

/// Kernel frame at x, oriented with its largest right component positive.
inline KernelFrame kernel_frame(const Landscape& land, const Vec& x) {
    const MetricEigen me = metric_eigen(land, x, land.potential().hessian(x));
    Eigen::Index k = 0;
    me.values.cwiseAbs().minCoeff(&k);
    KernelFrame f;
    f.eigenvalue = me.values[k];
    f.right = me.right.col(k);
    Eigen::Index big = 0;
    f.right.cwiseAbs().maxCoeff(&big);
    if (f.right[big] < 0.0) f.right = -f.right;
    f.left = me.left.col(k);
    f.left /= f.left.dot(f.right);
    return f;
}

struct NormalForm {
    double a = 0.0;            // oriented so that b >= 0
    double b = 0.0;
    double a_reference = 0.0;  // a in the fixed kernel frame
    double b_reference = 0.0;
    double cubic = 0.0;        // (1/6) third derivative, orientation independent
    double eigenvalue = 0.0;
    KernelFrame frame;
};

/// Kernel component f(s, eta) = l . X_eta(x + s r) and its derivatives.
inline NormalForm normal_form(const ParameterFamily& fam, const Vec& eta, const Vec& dir, const Vec& x,
                              const BifurcationOptions& opt = {}) {
    const Landscape land = fam(eta);
    NormalForm nf;
    nf.frame = kernel_frame(land, x);
    nf.eigenvalue = nf.frame.eigenvalue;
    const Vec& r = nf.frame.right;
    const Vec& l = nf.frame.left;
    auto f = [&](const Landscape& L, double s) { return l.dot(L.drift_unchecked(x + s * r)); };
    const double h = opt.fd_step_space;
    const double f0 = f(land, 0.0), fp = f(land, h), fm = f(land, -h);
    nf.a_reference = 0.5 * (fp - 2.0 * f0 + fm) / (h * h);
    const double h3 = 1e-3;
    nf.cubic = (f(land, 2 * h3) - 2.0 * f(land, h3) + 2.0 * f(land, -h3) - f(land, -2 * h3)) / (2.0 * h3 * h3 * h3) / 6.0;
    const double k = opt.fd_step_param;
    const Landscape lp = fam(eta + k * dir), lm = fam(eta - k * dir);
    nf.b_reference = -(f(lp, 0.0) - f(lm, 0.0)) / (2.0 * k);
    const double sgn = nf.b_reference < 0.0 ? -1.0 : 1.0;
    nf.a = sgn * nf.a_reference;
    nf.b = sgn * nf.b_reference;
    return nf;
}

namespace detail {

/// Newton with a finite-difference Jacobian for square systems F(z) = 0.
inline std::optional<Vec> fd_newton(const std::function<Vec(const Vec&)>& F, Vec z, double tol = 1e-11,
                                    int max_it = 40) {
    Vec Fz = F(z);
    if (!Fz.allFinite()) return std::nullopt;
    for (int it = 0; it < max_it; ++it) {
        if (Fz.norm() < tol) return z;
        const auto m = z.size();
        Mat J(Fz.size(), m);
        for (Eigen::Index j = 0; j < m; ++j) {
            const double h = 1e-7 * std::max(1.0, std::abs(z[j]));
            Vec zp = z, zm = z;
            zp[j] += h;
            zm[j] -= h;
            J.col(j) = (F(zp) - F(zm)) / (2.0 * h);
        }
        Vec step = J.colPivHouseholderQr().solve(-Fz);
        if (!step.allFinite()) return std::nullopt;
        double alpha = 1.0;
        bool ok = false;
        for (int k = 0; k < 30; ++k, alpha *= 0.5) {
            Vec zn = z + alpha * step;
            Vec Fn = F(zn);
            if (Fn.allFinite() && Fn.norm() < Fz.norm()) {
                z = zn;
                Fz = Fn;
                ok = true;
                break;
            }
        }
        if (!ok) break;
    }
    if (Fz.norm() < tol * 100.0) return z;
    return std::nullopt;
}

inline double smallest_eigenvalue(const Landscape& L, const Vec& x) {
    Mat H = L.potential().hessian(x);
    H = 0.5 * (H + H.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(H, Eigen::EigenvaluesOnly);
    Eigen::Index k = 0;
    es.eigenvalues().cwiseAbs().minCoeff(&k);
    return es.eigenvalues()[k];
}

}  // namespace detail

/// Solve grad V = 0 and smallest-magnitude Hessian eigenvalue = 0 for
/// (x, s) along eta = base + s dir.
inline std::optional<std::pair<Vec, double>> refine_fold(const ParameterFamily& fam, const Vec& base, const Vec& dir,
                                                         const Vec& x0, double s0) {
    const auto n = x0.size();
    auto F = [&](const Vec& z) {
        const Landscape L = fam(base + z[n] * dir);
        Vec out(n + 1);
        out.head(n) = L.potential().gradient(z.head(n));
        out[n] = detail::smallest_eigenvalue(L, z.head(n));
        return out;
    };
    Vec z(n + 1);
    z.head(n) = x0;
    z[n] = s0;
    // Newton may step outside the family's parameter range; that counts as no fold.
    std::optional<Vec> sol;
    try {
        sol = detail::fd_newton(F, z);
    } catch (const Error&) {
        return std::nullopt;
    }
    if (!sol) return std::nullopt;
    return std::make_pair(Vec(sol->head(n)), (*sol)[n]);
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

struct SweepPoint {
    double eta = 0.0;  // value actually evaluated
    double requested = 0.0;
    bool perturbed = false;
    Census census;
    MorseReport morse;
    std::optional<LandscapeDag> dag;
    std::string error;

    std::size_t attractors() const { return count_kind(census, PointKind::attractor); }
    std::size_t saddles() const { return count_kind(census, PointKind::saddle); }
    std::size_t repellors() const { return count_kind(census, PointKind::repellor); }
};

enum class BracketKind { cardinality, retarget };

struct Bracket {
    BracketKind kind = BracketKind::cardinality;
    double lo = 0.0, hi = 0.0;
    int count_lo = 0, count_hi = 0;
    int saddle = -1;  // retarget: saddle id at the low end
};

struct SweepResult {
    std::vector<SweepPoint> points;
    std::vector<Bracket> brackets;
};

namespace detail {

inline bool has_exact_witness(const LandscapeDag& d) {
    return std::any_of(d.witnesses.begin(), d.witnesses.end(), [](const NonSmaleWitness& w) { return w.exact; });
}

inline SweepPoint evaluate_point(const ParameterFamily& fam, double eta, const BifurcationOptions& opt,
                                 bool with_dag) {
    SweepPoint sp;
    sp.requested = eta;
    for (int attempt = 0; attempt < 2; ++attempt) {
        sp.eta = attempt == 0 ? eta : eta + opt.perturbation;
        sp.perturbed = attempt == 1;
        sp.dag.reset();
        sp.error.clear();
        const Landscape L = fam.at(sp.eta);
        sp.census = find_critical_points(L, opt.grid_density, opt.census);
        sp.morse = morse_report(sp.census, opt.census.hyperbolic_threshold);
        if (!sp.morse.morse_ok) continue;
        if (!with_dag) return sp;
        try {
            sp.dag = build_dag(L, sp.census, opt.separatrix);
        } catch (const Error& e) {
            sp.error = e.what();
            continue;
        }
        if (!has_exact_witness(*sp.dag)) return sp;
    }
    return sp;
}

inline int census_count(const ParameterFamily& fam, double eta, const BifurcationOptions& opt) {
    return static_cast<int>(find_critical_points(fam.at(eta), opt.grid_density, opt.census).size());
}

/// Split a cardinality bracket until every piece changes the count by at most 2.
inline void split_bracket(const ParameterFamily& fam, double lo, double hi, int clo, int chi,
                          const BifurcationOptions& opt, std::vector<Bracket>& out, int depth = 0) {
    if (clo == chi) return;
    if (std::abs(chi - clo) <= 2 || depth > 20 || hi - lo < 1e-3) {
        out.push_back({BracketKind::cardinality, lo, hi, clo, chi, -1});
        return;
    }
    const double mid = 0.5 * (lo + hi);
    const int cm = census_count(fam, mid, opt);
    split_bracket(fam, lo, mid, clo, cm, opt, out, depth + 1);
    split_bracket(fam, mid, hi, cm, chi, opt, out, depth + 1);
}

}  // namespace detail

/// Census and DAG at each grid value, and coarse brackets where the census
/// cardinality changes or the DAG changes by one edge retarget.
inline SweepResult sweep(const ParameterFamily& fam, const std::vector<double>& grid,
                         const BifurcationOptions& opt = {}) {
    if (grid.size() < 3) throw InputError("sweep needs at least 3 grid values");
    if (!std::is_sorted(grid.begin(), grid.end())) throw InputError("sweep grid must be sorted");
    SweepResult res;
    res.points.resize(grid.size());
    parallel_for(grid.size(),
                 [&](std::size_t i) { res.points[i] = detail::evaluate_point(fam, grid[i], opt, opt.build_dags); });
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const auto& p = res.points[i];
        const auto& q = res.points[i + 1];
        const int c0 = static_cast<int>(p.census.size()), c1 = static_cast<int>(q.census.size());
        if (c0 != c1) {
            detail::split_bracket(fam, p.eta, q.eta, c0, c1, opt, res.brackets);
            continue;
        }
        if (p.dag && q.dag) {
            DagDiff d = dag_edit_diff(*p.dag, *q.dag);
            if (d.is_single_retarget()) {
                int src = -1;
                for (auto& e : d.edits)
                    if (e.kind == EditKind::edge_remove) src = e.from;
                res.brackets.push_back({BracketKind::retarget, p.eta, q.eta, c0, c1, src});
            }
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Saddle-node location
// ---------------------------------------------------------------------------

/// Bisection on census cardinality, then a fold refinement and normal form.
/// Returns nullopt when the count change is not a fold (for instance points
/// entering through the domain boundary).
inline BifurcationEvent locate_saddle_node_along(const ParameterFamily& fam, const Vec& base, const Vec& dir,
                                                 double lo, double hi, const BifurcationOptions& opt = {}) {
    auto slice = restrict_family(fam, base, dir, lo, hi);
    int clo = detail::census_count(slice, lo, opt);
    int chi = detail::census_count(slice, hi, opt);
    if (clo == chi) throw InputError("bracket endpoints have equal census cardinality");
    BifurcationEvent ev;
    ev.kind = EventKind::saddle_node;
    ev.count_before = clo;
    ev.count_after = chi;
    while (hi - lo > opt.bisection_tol) {
        const double mid = 0.5 * (lo + hi);
        const int cm = detail::census_count(slice, mid, opt);
        if (cm == clo)
            lo = mid;
        else
            hi = mid;
    }
    ev.bracket_lo = lo;
    ev.bracket_hi = hi;
    // Merging pair: the closest pair of adjacent-index points on the richer side.
    const double rich = clo > chi ? lo : hi;
    const Census c = find_critical_points(slice.at(rich), opt.grid_density, opt.census);
    double best = std::numeric_limits<double>::infinity();
    Vec mid_point;
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = i + 1; j < c.size(); ++j) {
            if (std::abs(c[i].index - c[j].index) != 1) continue;
            const double d = (c[i].location - c[j].location).norm();
            if (d < best) {
                best = d;
                mid_point = 0.5 * (c[i].location + c[j].location);
            }
        }
    if (mid_point.size() == 0) {
        // Close to the fold the census may resolve only one of the pair; the
        // survivor is the point with the smallest |eigenvalue|.
        double small = std::numeric_limits<double>::infinity();
        for (const auto& p : c)
            if (p.min_abs_eigenvalue() < small) {
                small = p.min_abs_eigenvalue();
                mid_point = p.location;
            }
    }
    double s_bar = 0.5 * (lo + hi);
    if (mid_point.size() == 0) {
        ev.value = base + s_bar * dir;
        ev.min_abs_eigenvalue = std::numeric_limits<double>::infinity();
        return ev;
    }
    Vec x_bar = mid_point;
    if (auto fold = refine_fold(fam, base, dir, mid_point, s_bar)) {
        if (std::abs(fold->second - s_bar) < 1e-4 && (fold->first - mid_point).norm() < 0.1) {
            x_bar = fold->first;
            s_bar = fold->second;
        }
    }
    ev.value = base + s_bar * dir;
    ev.point = x_bar;
    const NormalForm nf = normal_form(fam, ev.value, dir, x_bar, opt);
    ev.a = nf.a;
    ev.b = nf.b;
    ev.a_reference = nf.a_reference;
    ev.cubic = nf.cubic;
    ev.min_abs_eigenvalue = std::abs(nf.eigenvalue);
    ev.generic = std::abs(ev.a) > opt.generic_threshold && std::abs(ev.b) > opt.generic_threshold;
    return ev;
}

inline BifurcationEvent locate_saddle_node(const ParameterFamily& fam, std::pair<double, double> bracket,
                                           const BifurcationOptions& opt = {}) {
    if (fam.arity != 1) throw InputError("locate_saddle_node needs a one-parameter family");
    return locate_saddle_node_along(fam, Vec::Zero(1), Vec::Ones(1), bracket.first, bracket.second, opt);
}

/// A located saddle-node whose witness is a genuine fold.
inline bool is_fold_witness(const BifurcationEvent& ev, const BifurcationOptions& opt = {}) {
    return ev.point.size() > 0 && ev.min_abs_eigenvalue < opt.witness_eigenvalue;
}

// ---------------------------------------------------------------------------
// Heteroclinic flip location
// ---------------------------------------------------------------------------

namespace detail {

struct FlipProbe {
    int saddle = -1;  // in this census
    std::vector<int> destinations;  // reference-attractor ids, sorted
    std::vector<SeparatrixTrace> traces;
    Census census;
};

/// Traces the unstable branches of the saddle nearest `where` and maps their
/// destinations to the nearest reference attractor.
inline FlipProbe probe_flip(const Landscape& L, const Vec& where, const std::vector<Vec>& ref_attractors,
                            const BifurcationOptions& opt) {
    FlipProbe p;
    p.census = find_critical_points(L, opt.grid_density, opt.census);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p.census.size(); ++i) {
        if (!p.census[i].is_saddle()) continue;
        const double d = (p.census[i].location - where).norm();
        if (d < best) {
            best = d;
            p.saddle = static_cast<int>(i);
        }
    }
    if (p.saddle < 0) throw InputError("no saddle to track in the flip bracket");
    p.traces = trace_unstable(L, p.census, p.saddle, opt.separatrix);
    std::set<int> dest;
    for (auto& tr : p.traces) {
        int id = -1;
        if (tr.destination >= 0) {
            double bd = std::numeric_limits<double>::infinity();
            for (std::size_t a = 0; a < ref_attractors.size(); ++a) {
                const double d = (ref_attractors[a] - p.census[tr.destination].location).norm();
                if (p.census[tr.destination].is_attractor() && d < bd) {
                    bd = d;
                    id = static_cast<int>(a);
                }
            }
            if (!p.census[tr.destination].is_attractor()) id = -2 - tr.destination;
        }
        dest.insert(id);
    }
    p.destinations.assign(dest.begin(), dest.end());
    return p;
}

}  // namespace detail

/// Bisection on the destination set of one saddle's unstable separatrices.
inline BifurcationEvent locate_flip(const ParameterFamily& fam, std::pair<double, double> bracket, int saddle_id,
                                    const BifurcationOptions& opt = {}) {
    double lo = bracket.first, hi = bracket.second;
    const Landscape Llo = fam.at(lo), Lhi = fam.at(hi);
    const Census clo = find_critical_points(Llo, opt.grid_density, opt.census);
    if (saddle_id < 0 || saddle_id >= static_cast<int>(clo.size()) || !clo[saddle_id].is_saddle())
        throw InputError("saddle id does not name a saddle at the bracket's low end");
    std::vector<Vec> ref;
    std::vector<int> ref_ids;
    for (std::size_t i = 0; i < clo.size(); ++i)
        if (clo[i].is_attractor()) {
            ref.push_back(clo[i].location);
            ref_ids.push_back(static_cast<int>(i));
        }
    const Vec s_lo = clo[saddle_id].location;
    auto p_lo = detail::probe_flip(Llo, s_lo, ref, opt);
    auto p_hi = detail::probe_flip(Lhi, s_lo, ref, opt);
    const Vec s_hi = p_hi.census[p_hi.saddle].location;
    if (p_lo.destinations == p_hi.destinations)
        throw InputError("separatrix destinations agree at both bracket endpoints");
    const double lo0 = lo, hi0 = hi;
    auto where = [&](double eta) {
        const double t = (hi0 > lo0) ? (eta - lo0) / (hi0 - lo0) : 0.0;
        return Vec((1.0 - t) * s_lo + t * s_hi);
    };
    while (hi - lo > opt.bisection_tol) {
        const double mid = 0.5 * (lo + hi);
        auto pm = detail::probe_flip(fam.at(mid), where(mid), ref, opt);
        if (pm.destinations == p_lo.destinations) {
            lo = mid;
            p_lo = std::move(pm);
        } else {
            hi = mid;
            p_hi = std::move(pm);
        }
    }
    BifurcationEvent ev;
    ev.kind = EventKind::heteroclinic_flip;
    ev.bracket_lo = lo;
    ev.bracket_hi = hi;
    ev.value = Vec::Constant(1, 0.5 * (lo + hi));
    ev.saddle = saddle_id;
    ev.saddle_location = p_lo.census[p_lo.saddle].location;
    for (int d : p_lo.destinations)
        if (d >= 0) {
            ev.old_destinations.push_back(ref_ids[d]);
            ev.old_locations.push_back(ref[d]);
        }
    for (int d : p_hi.destinations)
        if (d >= 0) {
            ev.new_destinations.push_back(ref_ids[d]);
            ev.new_locations.push_back(ref[d]);
        }
    // Tangency witness: closest approach of the switching branch to another saddle.
    for (const auto* probe : {&p_lo, &p_hi})
        for (const auto& tr : probe->traces)
            if (tr.nearest_saddle >= 0 && tr.nearest_saddle_distance < ev.approach) {
                ev.approach = tr.nearest_saddle_distance;
                ev.approached_saddle = tr.nearest_saddle;
            }
    ev.generic = ev.approach < opt.flip_witness;
    return ev;
}

// ---------------------------------------------------------------------------
// Event detection over a sweep
// ---------------------------------------------------------------------------

struct RejectedCandidate {
    double lo = 0.0, hi = 0.0;
    std::string reason;
};

struct EventReport {
    std::vector<BifurcationEvent> events;
    std::vector<RejectedCandidate> rejected;
};

inline EventReport detect_events(const ParameterFamily& fam, const SweepResult& sw,
                                 const BifurcationOptions& opt = {}) {
    EventReport rep;
    std::vector<std::optional<BifurcationEvent>> found(sw.brackets.size());
    std::vector<std::string> why(sw.brackets.size());
    for (std::size_t k = 0; k < sw.brackets.size(); ++k) {
        const Bracket& br = sw.brackets[k];
        try {
            if (br.kind == BracketKind::cardinality) {
                BifurcationEvent ev = locate_saddle_node(fam, {br.lo, br.hi}, opt);
                if (is_fold_witness(ev, opt))
                    found[k] = std::move(ev);
                else
                    why[k] = "count change without a degenerate point (min |eigenvalue| " +
                             std::to_string(ev.min_abs_eigenvalue) + ")";
            } else {
                found[k] = locate_flip(fam, {br.lo, br.hi}, br.saddle, opt);
            }
        } catch (const Error& e) {
            why[k] = e.what();
        }
    }
    for (std::size_t k = 0; k < sw.brackets.size(); ++k) {
        if (found[k])
            rep.events.push_back(std::move(*found[k]));
        else
            rep.rejected.push_back({sw.brackets[k].lo, sw.brackets[k].hi, why[k]});
    }
    std::stable_sort(rep.events.begin(), rep.events.end(),
                     [](const auto& a, const auto& b) { return a.parameter() < b.parameter(); });
    return rep;
}

// ---------------------------------------------------------------------------
// Two-parameter scans and cusps
// ---------------------------------------------------------------------------

struct TwoParameterGrid {
    std::vector<double> first, second;
};

struct EventCurve {
    std::vector<std::size_t> members;  // positions in TwoParameterScan::events
};

struct TwoParameterScan {
    std::vector<BifurcationEvent> events;
    std::vector<EventCurve> curves;
    std::vector<BifurcationEvent> cusps;
};

struct CuspCheck {
    double cubic = 0.0;
    bool nondegenerate = false;
    double min_abs_eigenvalue = 0.0;
};

/// Cubic coefficient of the kernel component at a cusp candidate.
inline CuspCheck cusp_check(const ParameterFamily& fam, const BifurcationEvent& candidate,
                            const BifurcationOptions& opt = {}) {
    const Landscape L = fam(candidate.value);
    const KernelFrame kf = kernel_frame(L, candidate.point);
    if (std::abs(kf.eigenvalue) > 1e-3) throw InputError("no kernel direction at the candidate point");
    Vec dir = Vec::Zero(fam.arity);
    dir[0] = 1.0;
    const NormalForm nf = normal_form(fam, candidate.value, dir, candidate.point, opt);
    CuspCheck c;
    c.cubic = nf.cubic;
    c.min_abs_eigenvalue = std::abs(kf.eigenvalue);
    c.nondegenerate = std::abs(c.cubic) > 1e-4;
    return c;
}

namespace detail {

/// Solve grad V = 0, kernel eigenvalue = 0, a = 0 for (x, eta1, eta2).
inline std::optional<std::pair<Vec, Vec>> refine_cusp(const ParameterFamily& fam, const Vec& x0, const Vec& eta0,
                                                      const BifurcationOptions& opt) {
    const auto n = x0.size();
    auto F = [&](const Vec& z) {
        const Vec eta = z.tail(2);
        const Landscape L = fam(eta);
        Vec out(n + 2);
        const Vec x = z.head(n);
        out.head(n) = L.potential().gradient(x);
        out[n] = smallest_eigenvalue(L, x);
        Vec dir = Vec::Zero(2);
        dir[0] = 1.0;
        out[n + 1] = normal_form(fam, eta, dir, x, opt).a_reference;
        return out;
    };
    Vec z(n + 2);
    z.head(n) = x0;
    z.tail(2) = eta0;
    auto sol = fd_newton(F, z, 1e-9, 30);
    if (!sol) return std::nullopt;
    return std::make_pair(Vec(sol->head(n)), Vec(sol->tail(2)));
}

}  // namespace detail

/// Runs the one-parameter detectors along every grid row and column, chains
/// located saddle-nodes into curves and marks cusp candidates where the
/// fixed-frame quadratic coefficient changes sign along a curve.
inline TwoParameterScan two_parameter_scan(const ParameterFamily& fam, const TwoParameterGrid& grid,
                                           const BifurcationOptions& opt_in = {}, bool detect_flips = false) {
    if (fam.arity != 2) throw InputError("two_parameter_scan needs a two-parameter family");
    if (grid.first.size() < 3 || grid.second.size() < 3) throw InputError("each grid axis needs at least 3 values");
    BifurcationOptions opt = opt_in;
    opt.build_dags = detect_flips;
    TwoParameterScan scan;

    struct Line {
        Vec base, dir;
        const std::vector<double>* values;
    };
    std::vector<Line> lines;
    for (double v : grid.second) {
        Vec base(2);
        base << 0.0, v;
        Vec dir(2);
        dir << 1.0, 0.0;
        lines.push_back({base, dir, &grid.first});
    }
    for (double v : grid.first) {
        Vec base(2);
        base << v, 0.0;
        Vec dir(2);
        dir << 0.0, 1.0;
        lines.push_back({base, dir, &grid.second});
    }
    for (const auto& line : lines) {
        const auto& vals = *line.values;
        ParameterFamily slice = restrict_family(fam, line.base, line.dir, vals.front(), vals.back());
        SweepResult sw = sweep(slice, vals, opt);
        for (const auto& br : sw.brackets) {
            try {
                if (br.kind == BracketKind::cardinality) {
                    BifurcationEvent ev = locate_saddle_node_along(fam, line.base, line.dir, br.lo, br.hi, opt);
                    if (is_fold_witness(ev, opt)) scan.events.push_back(std::move(ev));
                } else if (detect_flips) {
                    BifurcationEvent ev = locate_flip(slice, {br.lo, br.hi}, br.saddle, opt);
                    ev.value = line.base + ev.parameter() * line.dir;
                    scan.events.push_back(std::move(ev));
                }
            } catch (const Error&) {
            }
        }
    }

    // Nearest-neighbour chaining of saddle-node events.
    auto spacing = [](const std::vector<double>& v) {
        double s = 0.0;
        for (std::size_t i = 0; i + 1 < v.size(); ++i) s = std::max(s, v[i + 1] - v[i]);
        return s;
    };
    const double max_jump = 2.0 * std::max(spacing(grid.first), spacing(grid.second));
    Vec centre(2);
    centre << 0.5 * (grid.first.front() + grid.first.back()), 0.5 * (grid.second.front() + grid.second.back());
    const double max_point_jump = std::max(5.0 * max_jump, 0.1 * fam(centre).domain().radius);

    // A grid node hit by both its row and its column yields the same event twice.
    {
        std::vector<BifurcationEvent> unique;
        for (auto& e : scan.events) {
            bool dup = false;
            for (const auto& u : unique)
                if (u.kind == e.kind && (u.value - e.value).norm() < 1e-3 * max_jump && (u.point - e.point).norm() < 1e-6)
                    dup = true;
            if (!dup) unique.push_back(std::move(e));
        }
        scan.events = std::move(unique);
    }

    std::vector<std::size_t> folds;
    for (std::size_t i = 0; i < scan.events.size(); ++i)
        if (scan.events[i].kind == EventKind::saddle_node) folds.push_back(i);
    std::vector<char> used(scan.events.size(), 0);
    // Neighbours on one curve are close in parameter space and their
    // degenerate points are close in phase space.
    auto linkable = [&](std::size_t i, std::size_t j, double& d) {
        const auto& a = scan.events[i];
        const auto& b = scan.events[j];
        const double dp = (a.value - b.value).norm();
        const double dx = (a.point - b.point).norm();
        d = std::hypot(dp, dx);
        return dp <= max_jump && dx <= max_point_jump;
    };
    for (std::size_t start : folds) {
        if (used[start]) continue;
        EventCurve curve;
        curve.members.push_back(start);
        used[start] = 1;
        // Grow at both ends.
        for (int end = 0; end < 2; ++end) {
            for (;;) {
                const std::size_t tip = end == 0 ? curve.members.back() : curve.members.front();
                std::size_t best = scan.events.size();
                double bd = std::numeric_limits<double>::infinity();
                for (std::size_t j : folds) {
                    double d = 0.0;
                    if (used[j] || !linkable(tip, j, d)) continue;
                    if (d < bd) {
                        bd = d;
                        best = j;
                    }
                }
                if (best == scan.events.size()) break;
                used[best] = 1;
                if (end == 0)
                    curve.members.push_back(best);
                else
                    curve.members.insert(curve.members.begin(), best);
            }
        }
        scan.curves.push_back(std::move(curve));
    }

    // Cusp candidates: sign change of a in the fixed kernel frame.
    for (const auto& curve : scan.curves) {
        for (std::size_t k = 0; k + 1 < curve.members.size(); ++k) {
            const auto& e1 = scan.events[curve.members[k]];
            const auto& e2 = scan.events[curve.members[k + 1]];
            Vec d1 = Vec::Zero(2);
            d1[0] = 1.0;
            const NormalForm n1 = normal_form(fam, e1.value, d1, e1.point, opt);
            const NormalForm n2 = normal_form(fam, e2.value, d1, e2.point, opt);
            // Compare in a common orientation of the kernel direction.
            const double flip = n1.frame.right.dot(n2.frame.right) < 0.0 ? -1.0 : 1.0;
            if (!(n1.a_reference * flip * n2.a_reference < 0.0)) continue;
            BifurcationEvent c;
            c.kind = EventKind::cusp_candidate;
            c.value = 0.5 * (e1.value + e2.value);
            c.point = 0.5 * (e1.point + e2.point);
            if (auto r = detail::refine_cusp(fam, c.point, c.value, opt)) {
                if ((r->second - c.value).norm() < max_jump) {
                    c.point = r->first;
                    c.value = r->second;
                }
            }
            bool dup = false;
            for (const auto& o : scan.cusps)
                if ((o.value - c.value).norm() < max_jump && (o.point - c.point).norm() < max_point_jump) dup = true;
            if (dup) continue;
            const Landscape L = fam(c.value);
            const KernelFrame kf = kernel_frame(L, c.point);
            c.min_abs_eigenvalue = std::abs(kf.eigenvalue);
            c.cubic = normal_form(fam, c.value, d1, c.point, opt).cubic;
            scan.cusps.push_back(std::move(c));
        }
    }
    return scan;
}

}  // namespace morseland

#endif
