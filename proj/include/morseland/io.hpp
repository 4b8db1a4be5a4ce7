#ifndef MORSELAND_IO_HPP
#define MORSELAND_IO_HPP

#include "morseland/bifurcation.hpp"
#include "morseland/diffusion.hpp"
#include "morseland/hopfield.hpp"
#include "morseland/stochastic.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace morseland {

using Json = nlohmann::ordered_json;

/// Rounds to 12 significant digits so that reports are stable across
/// last-bit differences. Non-finite values pass through (they dump as null).
inline double sig12(double x) {
    if (!std::isfinite(x) || x == 0.0) return x == 0.0 ? 0.0 : x;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return std::strtod(buf, nullptr);
}

inline Json to_json(const Vec& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(sig12(v[i]));
    return a;
}

inline Json to_json(const std::vector<double>& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(sig12(x));
    return a;
}

inline Json to_json(const Mat& m) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(to_json(Vec(m.row(i).transpose())));
    return a;
}

inline Json num(double x) { return sig12(x); }

// ---------------------------------------------------------------------------
// Census, DAG, reports
// ---------------------------------------------------------------------------

inline Json to_json(const CriticalPoint& p) {
    return Json{{"location", to_json(p.location)},
                {"value", num(p.value)},
                {"eigenvalues", to_json(p.eigenvalues)},
                {"index", p.index},
                {"kind", std::string(to_string(p.kind))},
                {"hyperbolic", p.hyperbolic}};
}

inline Json census_to_json(const Census& c) {
    Json a = Json::array();
    for (const auto& p : c) a.push_back(to_json(p));
    return a;
}

inline Json to_json(const MorseReport& r) {
    return Json{{"morse", r.morse_ok}, {"min_abs_eigenvalue", num(r.min_abs_eigenvalue)}, {"nonhyperbolic", r.nonhyperbolic}};
}

inline Json to_json(const PoincareHopfReport& r) { return Json{{"sum", r.sum}, {"pass", r.pass}}; }

inline Json to_json(const TransversalityReport& r) {
    return Json{{"pass", r.pass},
                {"min_inward_product", num(r.min_inward_product)},
                {"worst_point", to_json(r.worst_point)},
                {"samples", r.samples}};
}

inline Json to_json(const DagAxioms& a) {
    return Json{{"no_self_edges", a.no_self_edges},
                {"transitively_closed", a.transitively_closed},
                {"index_decreasing", a.index_decreasing},
                {"acyclic", a.acyclic}};
}

inline Json edges_to_json(const std::vector<Edge>& edges) {
    Json a = Json::array();
    for (auto [i, j] : edges) a.push_back(Json::array({i, j}));
    return a;
}

inline Json dag_to_json(const LandscapeDag& dag) {
    Json nodes = Json::array();
    for (std::size_t i = 0; i < dag.nodes.size(); ++i)
        nodes.push_back(Json{{"id", i}, {"index", dag.nodes[i].index}, {"location", to_json(dag.nodes[i].location)}});
    Json witnesses = Json::array();
    for (const auto& w : dag.witnesses)
        witnesses.push_back(
            Json{{"source", w.source}, {"other_saddle", w.other_saddle}, {"distance", num(w.distance)}, {"exact", w.exact}});
    Json j{{"nodes", nodes}, {"edges", edges_to_json(dag.edges)}, {"direct_edges", edges_to_json(dag.direct_edges)}};
    j["axioms"] = to_json(check_axioms(dag));
    j["non_smale_witnesses"] = witnesses;
    j["warnings"] = dag.warnings;
    return j;
}

/// Graphviz digraph of the direct edges. Ranks follow the Morse index.
inline std::string dag_to_dot(const LandscapeDag& dag) {
    std::ostringstream os;
    os << "digraph landscape {\n  rankdir=TB;\n";
    for (std::size_t i = 0; i < dag.nodes.size(); ++i) {
        const auto& p = dag.nodes[i];
        const char* shape = p.kind == PointKind::attractor ? "circle" : p.kind == PointKind::saddle ? "diamond" : "box";
        os << "  n" << i << " [label=\"" << i << " (" << p.index << ")\\n" << format_point(p.location) << "\", shape=" << shape
           << "];\n";
    }
    for (auto [i, j] : dag.direct_edges) os << "  n" << i << " -> n" << j << ";\n";
    os << "}\n";
    return os.str();
}

inline Json to_json(const DagDiff& d) {
    Json edits = Json::array();
    for (const auto& e : d.edits) {
        Json j{{"kind", std::string(to_string(e.kind))}};
        if (e.kind == EditKind::node_add || e.kind == EditKind::node_remove) {
            j["node"] = e.node;
            j["index"] = e.index;
        } else {
            j["from"] = e.from;
            j["to"] = e.to;
            j["from_index"] = e.from_index;
            j["to_index"] = e.to_index;
        }
        edits.push_back(std::move(j));
    }
    return Json{{"match", d.match}, {"edits", edits}};
}

// ---------------------------------------------------------------------------
// Bifurcation reports
// ---------------------------------------------------------------------------

inline Json to_json(const BifurcationEvent& e) {
    Json j{{"kind", std::string(to_string(e.kind))}, {"value", to_json(e.value)}};
    j["bracket"] = Json::array({num(e.bracket_lo), num(e.bracket_hi)});
    if (e.kind == EventKind::heteroclinic_flip) {
        j["saddle"] = e.saddle;
        j["saddle_location"] = to_json(e.saddle_location);
        j["old_destinations"] = e.old_destinations;
        j["new_destinations"] = e.new_destinations;
        j["approach"] = num(e.approach);
        j["approached_saddle"] = e.approached_saddle;
        j["genericity"] = "destination-switch bisection (proxy)";
    } else {
        j["point"] = to_json(e.point);
        j["a"] = num(e.a);
        j["b"] = num(e.b);
        j["cubic"] = num(e.cubic);
        j["min_abs_eigenvalue"] = num(e.min_abs_eigenvalue);
        j["generic"] = e.generic;
        j["count_before"] = e.count_before;
        j["count_after"] = e.count_after;
    }
    return j;
}

inline Json to_json(const EventReport& r) {
    Json ev = Json::array(), rej = Json::array();
    for (const auto& e : r.events) ev.push_back(to_json(e));
    for (const auto& c : r.rejected)
        rej.push_back(Json{{"bracket", Json::array({num(c.lo), num(c.hi)})}, {"reason", c.reason}});
    return Json{{"events", ev}, {"rejected", rej}};
}

/// Per-value digests plus the DAG edit script between consecutive values.
inline Json sweep_to_json(const SweepResult& sw, const EventReport& events) {
    Json pts = Json::array();
    for (const auto& p : sw.points) {
        Json j{{"eta", num(p.eta)},         {"perturbed", p.perturbed},
               {"attractors", p.attractors()}, {"saddles", p.saddles()},
               {"repellors", p.repellors()},   {"min_abs_eigenvalue", num(p.morse.min_abs_eigenvalue)}};
        if (p.dag) j["edges"] = edges_to_json(p.dag->edges);
        if (!p.error.empty()) j["error"] = p.error;
        pts.push_back(std::move(j));
    }
    Json edits = Json::array();
    for (std::size_t k = 1; k < sw.points.size(); ++k) {
        const auto &p = sw.points[k - 1], &q = sw.points[k];
        if (!p.dag || !q.dag) continue;
        const DagDiff d = dag_edit_diff(*p.dag, *q.dag);
        if (d.empty()) continue;
        Json j = to_json(d);
        j["from_eta"] = num(p.eta);
        j["to_eta"] = num(q.eta);
        edits.push_back(std::move(j));
    }
    Json j = to_json(events);
    return Json{{"points", pts}, {"events", j["events"]}, {"rejected", j["rejected"]}, {"edit_script", edits}};
}

inline void write_sweep_csv(std::ostream& os, const SweepResult& sw) {
    os << "eta,attractors,saddles,min_abs_eigenvalue\n" << std::setprecision(12);
    for (const auto& p : sw.points)
        os << p.eta << ',' << p.attractors() << ',' << p.saddles() << ',' << p.morse.min_abs_eigenvalue << '\n';
}

// ---------------------------------------------------------------------------
// Stochastic
// ---------------------------------------------------------------------------

inline Json to_json(const ZeroNoiseReport& r) {
    Json masses = Json::array();
    for (const auto& m : r.attractor_masses) masses.push_back(to_json(m));
    Json res = Json::array();
    for (auto [i, j] : r.resonant_pairs) res.push_back(Json::array({i, j}));
    return Json{{"epsilons", to_json(r.epsilons)},       {"attractors", r.attractors},
                {"attractor_masses", masses},            {"outside_mass", to_json(r.outside_mass)},
                {"limit_weights", to_json(r.limit_weights)}, {"resonant_pairs", res}};
}

/// x1, x2, density rows for a two-dimensional grid.
inline void write_density_csv(std::ostream& os, const Grid& g, const std::vector<double>& density) {
    if (g.dimension != 2) throw InputError("density grids are written for two-dimensional landscapes only");
    os << "x1,x2,density\n" << std::setprecision(12);
    for (std::size_t c = 0; c < g.cells(); ++c) {
        const Vec x = g.center(c);
        os << x[0] << ',' << x[1] << ',' << (std::isfinite(density[c]) ? density[c] : 0.0) << '\n';
    }
}

inline void write_trajectory_csv(std::ostream& os, const TrajectoryRecord& tr) {
    const auto n = tr.points.empty() ? 0 : tr.points.front().size();
    os << 't';
    for (Eigen::Index i = 0; i < n; ++i) os << ",x" << i + 1;
    os << ",energy\n" << std::setprecision(12);
    for (std::size_t k = 0; k < tr.points.size(); ++k) {
        os << tr.times[k];
        for (Eigen::Index i = 0; i < n; ++i) os << ',' << tr.points[k][i];
        os << ',' << (k < tr.energies.size() ? tr.energies[k] : 0.0) << '\n';
    }
}

inline void write_points_csv(std::ostream& os, const std::vector<Vec>& pts) {
    const auto n = pts.empty() ? 0 : pts.front().size();
    for (Eigen::Index i = 0; i < n; ++i) os << (i ? "," : "") << 'x' << i + 1;
    os << '\n' << std::setprecision(12);
    for (const auto& p : pts) {
        for (Eigen::Index i = 0; i < n; ++i) os << (i ? "," : "") << p[i];
        os << '\n';
    }
}

// ---------------------------------------------------------------------------
// Matrix CSV
// ---------------------------------------------------------------------------

/// Comma- or whitespace-separated rows. A first line that does not parse as
/// numbers is treated as a header.
inline Mat read_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        for (char& ch : line)
            if (ch == ',' || ch == ';' || ch == '\t' || ch == '\r') ch = ' ';
        std::istringstream ls(line);
        std::vector<double> row;
        std::string tok;
        bool bad = false;
        while (ls >> tok) {
            char* end = nullptr;
            const double v = std::strtod(tok.c_str(), &end);
            if (end == tok.c_str() || *end != '\0') {
                bad = true;
                break;
            }
            row.push_back(v);
        }
        if (bad) {
            if (rows.empty() && lineno == 1) continue;
            throw InputError(path + ":" + std::to_string(lineno) + ": not a number");
        }
        if (row.empty()) continue;
        if (!rows.empty() && row.size() != rows.front().size())
            throw InputError(path + ":" + std::to_string(lineno) + ": ragged row");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InputError(path + ": no data");
    Mat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

inline void write_matrix_csv(std::ostream& os, const Mat& m) {
    os << std::setprecision(17);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << m(i, j);
        os << '\n';
    }
}

inline void write_matrix_csv(const std::string& path, const Mat& m) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    write_matrix_csv(out, m);
}

}  // namespace morseland

#endif
