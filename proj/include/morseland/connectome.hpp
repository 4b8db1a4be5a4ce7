#ifndef MORSELAND_CONNECTOME_HPP
#define MORSELAND_CONNECTOME_HPP

#include "morseland/critical.hpp"
#include "morseland/flow.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace morseland {

struct SeparatrixOptions {
    double offset = 1e-4;
    double dt = 0.01;
    double t_max = 1e4;
    double snap_radius = 1e-6;   // stop once this close to a census attractor
    double match_radius = 1e-4;  // converged endpoint to census point
    double witness_radius = 1e-3;
    int repellor_rays = 64;
    int sphere_directions = 200;
    bool trace_stable = true;  // backward traces of one-dimensional stable manifolds
};

/// One traced branch of an invariant manifold.
struct SeparatrixTrace {
    int source = -1;        // census position of the traced point
    Vec direction;          // seeding direction
    bool backward = false;  // stable-manifold trace (reverse time)
    Vec endpoint;
    int destination = -1;  // census position reached, -1 if none
    bool exited = false;   // left the domain (only expected backward)
    // Closest approach to a saddle other than the source.
    int nearest_saddle = -1;
    double nearest_saddle_distance = std::numeric_limits<double>::infinity();
};

// ---------------------------------------------------------------------------
// Linearization in the metric
// ---------------------------------------------------------------------------

struct MetricEigen {
    Vec values;         // eigenvalues of g^{-1/2} H g^{-1/2}, ascending
    Mat right;          // columns e_k = g^{-1/2} w_k, normalized (eigenvectors of g^{-1} H)
    Mat left;           // columns l_k = g^{1/2} w_k, with l_k . e_j = delta_kj before normalizing e
};

/// Eigen-decomposition of the linearization -g^{-1} H at x. Eigenvalue
/// signs match the Hessian's (the metric is positive definite).
inline MetricEigen metric_eigen(const Landscape& land, const Vec& x, const Mat& H) {
    const Mat g = land.metric().matrix(x);
    Eigen::SelfAdjointEigenSolver<Mat> gs(g);
    if ((gs.eigenvalues().array() <= 0.0).any())
        throw NumericError("metric not positive definite at " + format_point(x));
    const Mat g_half = gs.eigenvectors() * gs.eigenvalues().cwiseSqrt().asDiagonal() * gs.eigenvectors().transpose();
    const Mat g_mhalf =
        gs.eigenvectors() * gs.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * gs.eigenvectors().transpose();
    Mat S = g_mhalf * H * g_mhalf;
    S = 0.5 * (S + S.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(S);
    MetricEigen me;
    me.values = es.eigenvalues();
    me.right = g_mhalf * es.eigenvectors();
    me.left = g_half * es.eigenvectors();
    for (Eigen::Index k = 0; k < me.right.cols(); ++k) me.right.col(k).normalize();
    return me;
}

/// Unit directions spanning the unstable subspace of a critical point:
/// two for index 1, a fan of rays for index 2 in the plane, quasi-random
/// directions in the unstable subspace otherwise.
inline std::vector<Vec> unstable_directions(const Landscape& land, const CriticalPoint& cp,
                                            const SeparatrixOptions& opt = {}) {
    const MetricEigen me = metric_eigen(land, cp.location, land.hessian(cp.location));
    std::vector<Vec> basis;
    for (Eigen::Index k = 0; k < me.values.size(); ++k)
        if (me.values[k] < 0.0 && static_cast<int>(basis.size()) < cp.index) basis.push_back(me.right.col(k));
    std::vector<Vec> dirs;
    const int k = static_cast<int>(basis.size());
    if (k == 0) return dirs;
    if (k == 1) {
        dirs.push_back(basis[0]);
        dirs.push_back(-basis[0]);
    } else if (k == 2 && land.dimension() == 2) {
        for (int r = 0; r < opt.repellor_rays; ++r) {
            const double th = 2.0 * std::numbers::pi * r / opt.repellor_rays;
            Vec d = std::cos(th) * basis[0] + std::sin(th) * basis[1];
            dirs.push_back(d.normalized());
        }
    } else {
        for (int r = 0; r < opt.sphere_directions; ++r) {
            Vec c = (2.0 * halton(static_cast<std::uint64_t>(r), k).array() - 1.0).matrix();
            Vec d = Vec::Zero(land.dimension());
            for (int j = 0; j < k; ++j) d += c[j] * basis[j];
            if (d.norm() < 1e-12) continue;
            dirs.push_back(d.normalized());
        }
    }
    return dirs;
}

/// Stable direction of a critical point whose stable subspace is one-dimensional.
inline std::vector<Vec> stable_directions(const Landscape& land, const CriticalPoint& cp) {
    const int n = land.dimension();
    if (n - cp.index != 1) return {};
    const MetricEigen me = metric_eigen(land, cp.location, land.hessian(cp.location));
    Vec e = me.right.col(n - 1);
    return {e, -e};
}

// ---------------------------------------------------------------------------
// Tracing
// ---------------------------------------------------------------------------

inline SeparatrixTrace trace_branch(const Landscape& land, const Census& census, int source, const Vec& direction,
                                    bool backward, const SeparatrixOptions& opt = {}) {
    SeparatrixTrace tr;
    tr.source = source;
    tr.direction = direction;
    tr.backward = backward;
    const Vec x0 = census[source].location + opt.offset * direction;

    std::vector<int> saddles;
    for (std::size_t i = 0; i < census.size(); ++i)
        if (static_cast<int>(i) != source && census[i].is_saddle()) saddles.push_back(static_cast<int>(i));

    int snapped = -1;
    FlowOptions fo;
    fo.dt = opt.dt;
    fo.t_max = opt.t_max;
    fo.direction = backward ? Direction::backward : Direction::forward;
    auto observer = [&](double, const Vec& x, double) {
        for (int s : saddles) {
            const double d = (census[s].location - x).norm();
            if (d < tr.nearest_saddle_distance) {
                tr.nearest_saddle_distance = d;
                tr.nearest_saddle = s;
            }
        }
        if (!backward) {
            for (std::size_t i = 0; i < census.size(); ++i)
                if (census[i].is_attractor() && (census[i].location - x).norm() < opt.snap_radius) {
                    snapped = static_cast<int>(i);
                    return false;
                }
        }
        return true;
    };
    if (!land.contains(x0)) {
        tr.exited = true;
        tr.endpoint = x0;
        return tr;
    }
    try {
        FlowResult r = integrate_with(land, x0, fo, observer);
        tr.endpoint = r.point;
        if (snapped >= 0)
            tr.destination = snapped;
        else if (r.status == FlowStatus::converged)
            tr.destination = nearest_point(census, r.point, opt.match_radius);
    } catch (const IntegrationError& e) {
        tr.exited = true;
        tr.endpoint = e.exit_point();
    }
    return tr;
}

/// Forward traces from x_s + offset * e for every unstable direction e.
inline std::vector<SeparatrixTrace> trace_unstable(const Landscape& land, const Census& census, int source,
                                                   const SeparatrixOptions& opt = {}) {
    const auto dirs = unstable_directions(land, census[source], opt);
    std::vector<SeparatrixTrace> out(dirs.size());
    parallel_for(dirs.size(), [&](std::size_t k) { out[k] = trace_branch(land, census, source, dirs[k], false, opt); });
    return out;
}

/// Destinations (omega limits) of the unstable separatrices of a saddle.
/// Exits from the domain surface as IntegrationError.
inline std::vector<Vec> unstable_separatrices(const Landscape& land, const CriticalPoint& saddle,
                                              double offset = 1e-4) {
    if (saddle.index < 1) throw InputError("unstable_separatrices needs a point of index >= 1");
    SeparatrixOptions opt;
    opt.offset = offset;
    const auto dirs = unstable_directions(land, saddle, opt);
    std::vector<Vec> out(dirs.size());
    parallel_for(dirs.size(), [&](std::size_t k) { out[k] = omega_limit(land, saddle.location + offset * dirs[k]); });
    return out;
}

// ---------------------------------------------------------------------------
// DAG
// ---------------------------------------------------------------------------

using Edge = std::pair<int, int>;

struct NonSmaleWitness {
    int source = -1;
    int other_saddle = -1;
    double distance = 0.0;
    bool exact = false;  // separatrix converged onto the other saddle
};

struct DagAxioms {
    bool no_self_edges = true;
    bool transitively_closed = true;
    bool index_decreasing = true;
    bool acyclic = true;
    bool all() const { return no_self_edges && transitively_closed && index_decreasing && acyclic; }
};

struct LandscapeDag {
    Census nodes;
    std::vector<Edge> direct_edges;  // from traced separatrices
    std::vector<Edge> edges;         // transitive closure, sorted
    std::vector<SeparatrixTrace> traces;
    std::vector<NonSmaleWitness> witnesses;
    std::vector<std::string> warnings;

    bool has_edge(int i, int j) const { return std::binary_search(edges.begin(), edges.end(), Edge{i, j}); }
    std::size_t size() const { return nodes.size(); }
};

/// Warshall closure of an edge list over n nodes, returned sorted.
inline std::vector<Edge> transitive_closure(std::size_t n, const std::vector<Edge>& edges) {
    std::vector<std::vector<char>> r(n, std::vector<char>(n, 0));
    for (auto [i, j] : edges) r[i][j] = 1;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            if (r[i][k])
                for (std::size_t j = 0; j < n; ++j)
                    if (r[k][j]) r[i][j] = 1;
    std::vector<Edge> out;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (r[i][j]) out.emplace_back(static_cast<int>(i), static_cast<int>(j));
    return out;
}

inline DagAxioms check_axioms(const LandscapeDag& dag) {
    DagAxioms ax;
    const std::size_t n = dag.nodes.size();
    for (auto [i, j] : dag.edges) {
        if (i == j) ax.no_self_edges = false;
        if (!(dag.nodes[i].index > dag.nodes[j].index)) ax.index_decreasing = false;
    }
    auto closed = transitive_closure(n, dag.edges);
    auto sorted = dag.edges;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    ax.transitively_closed = closed == sorted;
    for (auto [i, j] : closed)
        if (i == j) ax.acyclic = false;
    return ax;
}

/// DAG from direct separatrix edges. Forward traces of every point of index
/// >= 1 give i -> destination; backward traces of one-dimensional stable
/// manifolds give source-of-origin -> saddle.
inline LandscapeDag build_dag(const Landscape& land, const Census& census, const SeparatrixOptions& opt = {}) {
    LandscapeDag dag;
    dag.nodes = census;
    for (const auto& p : census)
        if (!p.hyperbolic) throw InputError("build_dag needs a Morse census; nonhyperbolic point at " +
                                            format_point(p.location));

    struct Job {
        int source;
        Vec dir;
        bool backward;
    };
    std::vector<Job> jobs;
    for (std::size_t i = 0; i < census.size(); ++i) {
        const int s = static_cast<int>(i);
        if (census[i].index >= 1)
            for (auto& d : unstable_directions(land, census[i], opt)) jobs.push_back({s, d, false});
        if (opt.trace_stable && census[i].is_saddle())
            for (auto& d : stable_directions(land, census[i])) jobs.push_back({s, d, true});
    }
    std::vector<SeparatrixTrace> traces(jobs.size());
    parallel_for(jobs.size(), [&](std::size_t k) {
        traces[k] = trace_branch(land, census, jobs[k].source, jobs[k].dir, jobs[k].backward, opt);
    });

    std::set<Edge> direct;
    for (const auto& tr : traces) {
        if (tr.backward) {
            if (tr.destination >= 0 && tr.destination != tr.source) direct.insert({tr.destination, tr.source});
            continue;
        }
        if (tr.exited) {
            dag.warnings.push_back("separatrix from " + format_point(census[tr.source].location) +
                                   " left the domain");
            continue;
        }
        if (tr.destination < 0) {
            dag.warnings.push_back("separatrix from " + format_point(census[tr.source].location) +
                                   " ended at unmatched point " + format_point(tr.endpoint));
            continue;
        }
        if (tr.destination == tr.source) continue;
        if (census[tr.destination].index >= census[tr.source].index) {
            // Separatrix landed on a saddle of equal index: a non-transverse
            // connection, reported rather than added as an edge.
            dag.witnesses.push_back({tr.source, tr.destination, 0.0, true});
            continue;
        }
        direct.insert({tr.source, tr.destination});
        if (census[tr.source].is_saddle()) {
            if (tr.nearest_saddle >= 0 && tr.nearest_saddle_distance < opt.witness_radius) {
                dag.witnesses.push_back({tr.source, tr.nearest_saddle, tr.nearest_saddle_distance, false});
            }
        }
    }
    dag.direct_edges.assign(direct.begin(), direct.end());
    dag.edges = transitive_closure(census.size(), dag.direct_edges);
    dag.traces = std::move(traces);
    return dag;
}

// ---------------------------------------------------------------------------
// Isomorphism and edit diff
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::vector<char>> adjacency(const LandscapeDag& d) {
    std::vector<std::vector<char>> a(d.nodes.size(), std::vector<char>(d.nodes.size(), 0));
    for (auto [i, j] : d.edges) a[i][j] = 1;
    return a;
}

}  // namespace detail

/// True iff an index-preserving bijection maps the edge set of d1 onto that of d2.
inline bool diagram_isomorphic(const LandscapeDag& d1, const LandscapeDag& d2) {
    const std::size_t n = d1.nodes.size();
    if (n != d2.nodes.size() || d1.edges.size() != d2.edges.size()) return false;
    std::vector<int> c1, c2;
    for (auto& p : d1.nodes) c1.push_back(p.index);
    for (auto& p : d2.nodes) c2.push_back(p.index);
    {
        auto a = c1, b = c2;
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        if (a != b) return false;
    }
    const auto a1 = detail::adjacency(d1), a2 = detail::adjacency(d2);
    std::vector<int> out_deg1(n), in_deg1(n), out_deg2(n), in_deg2(n);
    for (auto [i, j] : d1.edges) ++out_deg1[i], ++in_deg1[j];
    for (auto [i, j] : d2.edges) ++out_deg2[i], ++in_deg2[j];

    std::vector<int> map(n, -1);
    std::vector<char> used(n, 0);
    auto extend = [&](auto&& self, std::size_t k) -> bool {
        if (k == n) return true;
        for (std::size_t c = 0; c < n; ++c) {
            if (used[c] || c2[c] != c1[k] || out_deg2[c] != out_deg1[k] || in_deg2[c] != in_deg1[k]) continue;
            bool ok = true;
            for (std::size_t m = 0; m < k && ok; ++m) {
                if (a1[k][m] != a2[c][map[m]] || a1[m][k] != a2[map[m]][c]) ok = false;
            }
            if (!ok) continue;
            map[k] = static_cast<int>(c);
            used[c] = 1;
            if (self(self, k + 1)) return true;
            used[c] = 0;
            map[k] = -1;
        }
        return false;
    };
    return extend(extend, 0);
}

enum class EditKind { node_add, node_remove, edge_add, edge_remove };

inline std::string_view to_string(EditKind k) {
    switch (k) {
        case EditKind::node_add: return "node-add";
        case EditKind::node_remove: return "node-remove";
        case EditKind::edge_add: return "edge-add";
        case EditKind::edge_remove: return "edge-remove";
    }
    return "unknown";
}

/// One edit. Node ids refer to the DAG the item exists in (d1 for removals,
/// d2 for additions); `index` carries the Morse index labels.
struct DagEdit {
    EditKind kind;
    int node = -1;
    int from = -1;
    int to = -1;
    int index = -1;
    int from_index = -1;
    int to_index = -1;
};

struct DagDiff {
    std::vector<int> match;  // d1 node -> d2 node or -1
    std::vector<DagEdit> edits;

    std::size_t count(EditKind k) const {
        return static_cast<std::size_t>(
            std::count_if(edits.begin(), edits.end(), [k](const DagEdit& e) { return e.kind == k; }));
    }
    bool empty() const { return edits.empty(); }
    /// Exactly one edge removed and one added, sharing the source, with no node changes.
    bool is_single_retarget() const {
        if (edits.size() != 2 || count(EditKind::edge_add) != 1 || count(EditKind::edge_remove) != 1) return false;
        const DagEdit* rem = nullptr;
        const DagEdit* add = nullptr;
        for (auto& e : edits) (e.kind == EditKind::edge_add ? add : rem) = &e;
        return match[rem->from] == add->from;
    }
};

/// Greedy nearest-location matching within index classes, then edge edits
/// on the closed edge sets.
inline DagDiff dag_edit_diff(const LandscapeDag& d1, const LandscapeDag& d2) {
    DagDiff diff;
    const std::size_t n1 = d1.nodes.size(), n2 = d2.nodes.size();
    struct Cand {
        double dist;
        int i, j;
    };
    std::vector<Cand> cands;
    for (std::size_t i = 0; i < n1; ++i)
        for (std::size_t j = 0; j < n2; ++j)
            if (d1.nodes[i].index == d2.nodes[j].index &&
                d1.nodes[i].location.size() == d2.nodes[j].location.size())
                cands.push_back({(d1.nodes[i].location - d2.nodes[j].location).norm(), static_cast<int>(i),
                                 static_cast<int>(j)});
    std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.dist < b.dist; });
    diff.match.assign(n1, -1);
    std::vector<int> back(n2, -1);
    for (const auto& c : cands) {
        if (diff.match[c.i] >= 0 || back[c.j] >= 0) continue;
        diff.match[c.i] = c.j;
        back[c.j] = c.i;
    }
    for (std::size_t i = 0; i < n1; ++i)
        if (diff.match[i] < 0)
            diff.edits.push_back({EditKind::node_remove, static_cast<int>(i), -1, -1, d1.nodes[i].index});
    for (std::size_t j = 0; j < n2; ++j)
        if (back[j] < 0) diff.edits.push_back({EditKind::node_add, static_cast<int>(j), -1, -1, d2.nodes[j].index});
    for (auto [i, j] : d1.edges) {
        const int mi = diff.match[i], mj = diff.match[j];
        if (mi < 0 || mj < 0 || !d2.has_edge(mi, mj))
            diff.edits.push_back(
                {EditKind::edge_remove, -1, i, j, -1, d1.nodes[i].index, d1.nodes[j].index});
    }
    for (auto [i, j] : d2.edges) {
        const int bi = back[i], bj = back[j];
        if (bi < 0 || bj < 0 || !d1.has_edge(bi, bj))
            diff.edits.push_back({EditKind::edge_add, -1, i, j, -1, d2.nodes[i].index, d2.nodes[j].index});
    }
    return diff;
}

}  // namespace morseland

#endif
