#include "morseland/morseland.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace morseland;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("morseland_io_" + name)).string();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

}  // namespace

TEST_CASE("sig12 keeps twelve significant digits", "[io]") {
    CHECK(sig12(1.0 / 3.0) == 0.333333333333);
    CHECK(sig12(2.0) == 2.0);
    CHECK(sig12(-1234567.8901234567) == -1234567.89012);
    CHECK(sig12(0.0) == 0.0);
    CHECK(sig12(sig12(M_PI)) == sig12(M_PI));
    CHECK(std::isnan(sig12(std::nan(""))));
}

TEST_CASE("reports are identical for identical inputs", "[io]") {
    const Landscape land = make_builtin("dual-cusp");
    const auto dump = [&] {
        const Census c = find_critical_points(land);
        return dag_to_json(build_dag(land, c)).dump(2);
    };
    CHECK(dump() == dump());
}

TEST_CASE("census JSON fields", "[io]") {
    const Census c = find_critical_points(make_builtin("dual-well"));
    const Json j = census_to_json(c);
    REQUIRE(j.size() == 3);
    CHECK(j[2]["index"] == 1);
    CHECK(j[2]["kind"] == "saddle");
    CHECK(j[0]["value"].get<double>() == -1.0);
}

TEST_CASE("DAG serialisations", "[io]") {
    const Landscape land = make_builtin("dual-well");
    const LandscapeDag d = build_dag(land, find_critical_points(land));
    const Json j = dag_to_json(d);
    CHECK(j["nodes"].size() == 3);
    CHECK(j["edges"].size() == 2);
    CHECK(j["axioms"]["acyclic"] == true);
    const std::string dot = dag_to_dot(d);
    CHECK(dot.rfind("digraph", 0) == 0);
    CHECK(dot.find("n2 -> n0;") != std::string::npos);
}

TEST_CASE("sweep CSV header", "[io]") {
    SweepResult sw;
    SweepPoint p;
    p.eta = 0.5;
    sw.points.push_back(p);
    std::ostringstream os;
    write_sweep_csv(os, sw);
    CHECK(os.str().rfind("eta,attractors,saddles,min_abs_eigenvalue\n", 0) == 0);
}

TEST_CASE("trajectory and points CSV", "[io]") {
    TrajectoryRecord tr;
    tr.push(0.0, Vec(Eigen::Vector2d(1, 2)), 3.0);
    std::ostringstream os;
    write_trajectory_csv(os, tr);
    CHECK(os.str() == "t,x1,x2,energy\n0,1,2,3\n");
    std::ostringstream ps;
    write_points_csv(ps, {Vec(Eigen::Vector2d(0.5, -1))});
    CHECK(ps.str() == "x1,x2\n0.5,-1\n");
}

TEST_CASE("matrix CSV round trip is exact", "[io]") {
    Mat m(2, 3);
    m << 1.0 / 3.0, -2.5e-7, 1e10, M_PI, 0.0, -1.0;
    const std::string path = temp_path("roundtrip.csv");
    write_matrix_csv(path, m);
    CHECK(read_matrix_csv(path) == m);
    std::filesystem::remove(path);
}

TEST_CASE("matrix CSV accepts headers and whitespace", "[io]") {
    const std::string path = temp_path("header.csv");
    write_text(path, "a,b\n1 2\n\n3,4\n");
    const Mat m = read_matrix_csv(path);
    CHECK(m.rows() == 2);
    CHECK(m(1, 0) == 3.0);
    std::filesystem::remove(path);
}

TEST_CASE("matrix CSV errors", "[io]") {
    CHECK_THROWS_AS(read_matrix_csv(temp_path("does_not_exist.csv")), InputError);
    const std::string ragged = temp_path("ragged.csv");
    write_text(ragged, "1,2\n3\n");
    CHECK_THROWS_AS(read_matrix_csv(ragged), InputError);
    const std::string words = temp_path("words.csv");
    write_text(words, "1,2\nx,y\n");
    CHECK_THROWS_AS(read_matrix_csv(words), InputError);
    const std::string empty = temp_path("empty.csv");
    write_text(empty, "");
    CHECK_THROWS_AS(read_matrix_csv(empty), InputError);
    for (const auto& p : {ragged, words, empty}) std::filesystem::remove(p);
}

TEST_CASE("density CSV covers every grid cell", "[io]") {
    const GibbsMeasure gm = gibbs_measure(make_builtin("dual-well"), 0.5, 32);
    std::vector<double> dens(gm.mass.size());
    for (std::size_t c = 0; c < dens.size(); ++c) dens[c] = gm.density(c);
    std::ostringstream os;
    write_density_csv(os, gm.grid, dens);
    const std::string s = os.str();
    CHECK(std::count(s.begin(), s.end(), '\n') == 1 + 32 * 32);
}
