#include "morseland/morseland.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

using namespace morseland;

namespace {

Vec v2(double a, double b) { return Vec(Eigen::Vector2d(a, b)); }

LandscapeDag dag_of(const Landscape& land) { return build_dag(land, find_critical_points(land)); }

// Hand-built DAG over nodes with the given Morse indices.
LandscapeDag manual(const std::vector<int>& indices, std::vector<Edge> edges) {
    LandscapeDag d;
    for (std::size_t i = 0; i < indices.size(); ++i) {
        CriticalPoint p;
        p.index = indices[i];
        p.location = v2(static_cast<double>(i), 0.0);
        d.nodes.push_back(p);
    }
    d.direct_edges = edges;
    d.edges = transitive_closure(indices.size(), edges);
    return d;
}

}  // namespace

TEST_CASE("dual-well saddle connects to both minima", "[connectome]") {
    const LandscapeDag d = dag_of(make_builtin("dual-well"));
    REQUIRE(d.size() == 3);
    const int s = 2;
    REQUIRE(d.nodes[s].is_saddle());
    CHECK(d.edges.size() == 2);
    CHECK(d.has_edge(s, 0));
    CHECK(d.has_edge(s, 1));
    CHECK(check_axioms(d).all());
    CHECK(d.witnesses.empty());
}

TEST_CASE("unstable separatrices of the dual-well saddle run along the x1 axis", "[connectome]") {
    const Landscape land = make_builtin("dual-well");
    const Census c = find_critical_points(land);
    const auto ends = unstable_separatrices(land, c[2]);
    REQUIRE(ends.size() == 2);
    for (const auto& e : ends) CHECK(std::abs(std::abs(e[0]) - std::sqrt(2.0)) < 1e-6);
    CHECK(ends[0][0] * ends[1][0] < 0.0);
}

TEST_CASE("repellor edges reach every lower point", "[connectome]") {
    const Landscape land(make_polynomial_potential(2, {{{2, 0}, -0.5}, {{0, 2}, -0.5}, {{4, 0}, 0.25}, {{0, 4}, 0.25}}),
                         Metric{}, disc(2, 3.0));
    const LandscapeDag d = dag_of(land);
    REQUIRE(d.size() == 9);
    const int r = 8;
    REQUIRE(d.nodes[r].index == 2);
    for (int j = 0; j < 8; ++j) CHECK(d.has_edge(r, j));
    // Each axis saddle feeds the two adjacent minima: 4 x 2 + 8 from the repellor.
    CHECK(d.edges.size() == 16);
    CHECK(check_axioms(d).all());
}

TEST_CASE("transitive closure of a chain", "[connectome]") {
    const auto e = transitive_closure(4, {{3, 2}, {2, 1}, {1, 0}});
    CHECK(e.size() == 6);
    CHECK(std::binary_search(e.begin(), e.end(), Edge{3, 0}));
    CHECK(std::is_sorted(e.begin(), e.end()));
}

TEST_CASE("axiom checks detect each violation", "[connectome]") {
    CHECK(check_axioms(manual({0, 1, 2}, {{2, 1}, {1, 0}})).all());

    LandscapeDag self = manual({0, 1}, {{1, 0}});
    self.edges.push_back({1, 1});
    std::sort(self.edges.begin(), self.edges.end());
    CHECK_FALSE(check_axioms(self).no_self_edges);

    LandscapeDag open = manual({0, 1, 2}, {});
    open.edges = {{1, 0}, {2, 1}};
    CHECK_FALSE(check_axioms(open).transitively_closed);

    LandscapeDag up = manual({0, 1}, {{0, 1}});
    CHECK_FALSE(check_axioms(up).index_decreasing);

    LandscapeDag cyc = manual({1, 1}, {{0, 1}, {1, 0}});
    CHECK_FALSE(check_axioms(cyc).acyclic);
}

TEST_CASE("isomorphism respects indices and edges", "[connectome]") {
    const auto a = manual({0, 0, 1}, {{2, 0}, {2, 1}});
    const auto b = manual({1, 0, 0}, {{0, 1}, {0, 2}});
    const auto c = manual({1, 0, 0}, {{0, 1}});
    const auto d = manual({0, 1, 1}, {{1, 0}, {2, 0}});
    CHECK(diagram_isomorphic(a, b));
    CHECK_FALSE(diagram_isomorphic(a, c));
    CHECK_FALSE(diagram_isomorphic(a, d));
}

TEST_CASE("small tilts preserve the dual-cusp diagram", "[connectome]") {
    const Landscape land = make_builtin("dual-cusp");
    const LandscapeDag d0 = dag_of(land);
    const LandscapeDag d1 = dag_of(land.tilted(v2(1e-3, -1e-3)));
    CHECK(diagram_isomorphic(d0, d1));
    const DagDiff diff = dag_edit_diff(d0, d1);
    CHECK(diff.empty());
}

TEST_CASE("edit diff reports node and edge changes", "[connectome]") {
    const auto a = manual({0, 0, 1}, {{2, 0}, {2, 1}});
    const auto b = manual({0, 0, 1}, {{2, 0}});
    const DagDiff d = dag_edit_diff(a, b);
    CHECK(d.count(EditKind::edge_remove) == 1);
    CHECK(d.count(EditKind::edge_add) == 0);

    const auto e = manual({0}, {});
    const DagDiff d2 = dag_edit_diff(a, e);
    CHECK(d2.count(EditKind::node_remove) == 2);
    CHECK(d2.count(EditKind::edge_remove) == 2);
}

TEST_CASE("retargeting one edge is a single retarget", "[connectome]") {
    const auto a = manual({0, 0, 1}, {{2, 0}});
    const auto b = manual({0, 0, 1}, {{2, 1}});
    const DagDiff d = dag_edit_diff(a, b);
    CHECK(d.is_single_retarget());
}
