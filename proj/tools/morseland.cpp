// morseland command-line front end. Every command prints a JSON report on
// stdout; with --out DIR the report, a manifest and any CSV/DOT artifacts are
// also written there.

#include "morseland/morseland.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace morseland;

namespace {

constexpr const char* version = "morseland 0.1.0";

enum Exit { ok = 0, verdict_failed = 2, usage = 64, internal = 70 };

struct LandscapeArgs {
    std::string builtin;
    std::string landscape;  // file path or inline JSON
    std::vector<double> params;
    int dimension = 2;
    double radius = 0.0;
};

void add_landscape_options(CLI::App* cmd, LandscapeArgs& a) {
    cmd->add_option("--builtin", a.builtin, "builtin form (dual-well, dual-cusp, saddle-node-family, flip-family, ...)");
    cmd->add_option("--landscape", a.landscape, "landscape JSON document: file path or inline object");
    cmd->add_option("--params", a.params, "form parameters for --builtin");
    cmd->add_option("--dimension", a.dimension, "state dimension for --builtin")->capture_default_str();
    cmd->add_option("--radius", a.radius, "domain radius (0 = form default)")->capture_default_str();
}

Landscape resolve_landscape(const LandscapeArgs& a) {
    if (a.builtin.empty() == a.landscape.empty()) throw ConfigError("give exactly one of --builtin or --landscape");
    if (!a.builtin.empty()) return make_builtin(a.builtin, a.params, a.dimension, a.radius);
    nlohmann::json doc;
    const auto first = a.landscape.find_first_not_of(" \t\n");
    try {
        if (first != std::string::npos && a.landscape[first] == '{') {
            doc = nlohmann::json::parse(a.landscape);
        } else {
            std::ifstream in(a.landscape);
            if (!in) throw InputError("cannot open landscape file " + a.landscape);
            doc = nlohmann::json::parse(in);
        }
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("landscape JSON: ") + e.what());
    }
    return landscape_from_json(doc);
}

/// Resolved option values of the invoked command chain, in declaration order.
Json resolved_config(const CLI::App& app) {
    Json cfg;
    const CLI::App* cur = &app;
    std::string path;
    while (cur) {
        if (!path.empty() || cur != &app) path += path.empty() ? cur->get_name() : " " + cur->get_name();
        for (const CLI::Option* o : cur->get_options()) {
            if (o->get_name() == "--help" || o->get_name() == "--version") continue;
            const std::string key = o->get_name(false, true);
            if (o->count() > 0) {
                const auto& r = o->results();
                cfg[key] = r.size() == 1 && o->get_expected_max() <= 1 ? Json(r.front()) : Json(r);
            } else {
                cfg[key] = o->get_default_str();
            }
        }
        const CLI::App* next = nullptr;
        for (const CLI::App* s : cur->get_subcommands()) next = s;
        cur = next;
    }
    return Json{{"command", path}, {"options", cfg}};
}

struct Output {
    std::string dir;
    std::vector<std::string> artifacts;

    void file(const std::string& name, const std::string& content) {
        if (dir.empty()) return;
        std::ofstream f(fs::path(dir) / name, std::ios::binary);
        if (!f) throw InputError("cannot write " + (fs::path(dir) / name).string());
        f << content;
        artifacts.push_back(name);
    }
};

Output out;

std::string csv_of(const std::function<void(std::ostream&)>& w) {
    std::ostringstream os;
    w(os);
    return os.str();
}

std::vector<Vec> rows_of(const Mat& m) {
    std::vector<Vec> v;
    for (Eigen::Index i = 0; i < m.rows(); ++i) v.push_back(m.row(i).transpose());
    return v;
}

void require_seed(const CLI::Option* opt, const std::string& what) {
    if (opt->count() == 0) throw ConfigError(what + " is stochastic: --seed is required");
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct AnalyzeArgs {
    LandscapeArgs land;
    int grid = 24;
    double hyperbolic = 1e-6;
};

int cmd_analyze(const AnalyzeArgs& a, Json& report, bool dag_only) {
    const Landscape land = resolve_landscape(a.land);
    CensusOptions copt;
    copt.hyperbolic_threshold = a.hyperbolic;
    const Census census = find_critical_points(land, a.grid, copt);
    const MorseReport morse = morse_report(census, a.hyperbolic);
    const PoincareHopfReport ph = poincare_hopf_check(census);
    const TransversalityReport tr = boundary_transversality(land);
    report["landscape"] = landscape_to_json(land);
    if (!dag_only) {
        report["census"] = census_to_json(census);
        report["morse"] = to_json(morse);
        report["poincare_hopf"] = to_json(ph);
        report["transversality"] = to_json(tr);
    }
    bool dag_ok = true;
    if (morse.morse_ok) {
        const LandscapeDag dag = build_dag(land, census);
        report["dag"] = dag_to_json(dag);
        dag_ok = check_axioms(dag).all();
        out.file("dag.dot", dag_to_dot(dag));
        if (dag_only) std::cerr << dag_to_dot(dag);
    } else {
        report["dag"] = nullptr;
        report["dag_skipped"] = "census has nonhyperbolic points";
    }
    const bool pass = morse.morse_ok && ph.pass && tr.pass && dag_ok;
    report["verdict"] = pass ? "pass" : "fail";
    return pass ? ok : verdict_failed;
}

struct SweepArgs {
    std::string family = "saddle-node";
    std::vector<double> range{-1.0, 1.0};
    int grid = 41;
    int census_grid = 24;
    double tol = 1e-6;
    // diffusion cascade
    std::string gmm = "four-centroids";
    std::string centroids;
    double sigma0 = 0.1;
    std::string schedule = "VP";
    double beta_min = 0.1, beta_max = 20.0;
    double t_min = 0.01;
};

Json cascade_json(const CascadeReport& r, bool& pass) {
    Json j = sweep_to_json(r.sweep, r.events);
    j["backward_time"] = to_json(r.etas);
    j["attractor_counts"] = r.attractor_counts;
    j["saddle_counts"] = r.saddle_counts;
    j["repellor_counts"] = r.repellor_counts;
    j["saddle_node_events"] = r.saddle_node_events;
    j["nondecreasing"] = r.nondecreasing;
    const int first = r.attractor_counts.empty() ? 0 : r.attractor_counts.front();
    const int last = r.attractor_counts.empty() ? 0 : r.attractor_counts.back();
    pass = r.nondecreasing && first == 1 && last >= 2 && r.saddle_node_events >= last - 1;
    j["cascade_verdict"] = pass ? "pass" : "fail";
    return j;
}

GmmData resolve_gmm(const SweepArgs& a) {
    if (!a.centroids.empty()) return make_gmm(rows_of(read_matrix_csv(a.centroids)), a.sigma0);
    if (a.gmm == "four-centroids") return builtin::four_centroids(a.sigma0);
    throw ConfigError("unknown --gmm '" + a.gmm + "'");
}

int cmd_sweep(const SweepArgs& a, Json& report) {
    BifurcationOptions opt;
    opt.grid_density = a.census_grid;
    opt.bisection_tol = a.tol;
    if (a.family == "diffusion-cascade") {
        const GmmData d = resolve_gmm(a);
        const NoiseSchedule s = make_schedule(schedule_kind_from_string(a.schedule), a.beta_min, a.beta_max);
        opt.build_dags = false;
        const CascadeReport r = diffusion_cascade(d, s, static_cast<std::size_t>(a.grid), a.t_min, opt);
        bool pass = false;
        report["family"] = a.family;
        report["sweep"] = cascade_json(r, pass);
        out.file("sweep.csv", csv_of([&](std::ostream& os) { write_sweep_csv(os, r.sweep); }));
        return pass ? ok : verdict_failed;
    }
    if (a.range.size() != 2 || !(a.range[0] < a.range[1])) throw ConfigError("--range needs lo < hi");
    if (a.grid < 3) throw ConfigError("--grid needs at least 3 values");
    ParameterFamily fam;
    if (a.family == "saddle-node")
        fam = saddle_node_parameter_family(a.range[0], a.range[1]);
    else if (a.family == "flip")
        fam = flip_parameter_family(a.range[0], a.range[1]);
    else
        throw ConfigError("unknown family '" + a.family + "'");
    std::vector<double> g;
    for (int i = 0; i < a.grid; ++i) g.push_back(a.range[0] + (a.range[1] - a.range[0]) * i / (a.grid - 1));
    const SweepResult sw = sweep(fam, g, opt);
    const EventReport ev = detect_events(fam, sw, opt);
    report["family"] = a.family;
    report["sweep"] = sweep_to_json(sw, ev);
    out.file("sweep.csv", csv_of([&](std::ostream& os) { write_sweep_csv(os, sw); }));
    return ok;
}

struct GibbsArgs {
    LandscapeArgs land;
    double eps = 1.0;
    int grid = 200;
    std::vector<double> zero_noise;
    double ball = 0.5;
};

int cmd_gibbs(const GibbsArgs& a, Json& report) {
    const Landscape land = resolve_landscape(a.land);
    const GibbsMeasure gm = gibbs_measure(land, a.eps, a.grid);
    report["epsilon"] = num(a.eps);
    report["log_Z"] = num(gm.log_Z);
    report["underresolved"] = gm.underresolved;
    if (land.dimension() >= 1) {
        const double half = gm.mass_where([](const Vec& x) { return x[0] > 0.0; });
        report["mass_x1_positive"] = num(half);
    }
    if (!a.zero_noise.empty()) {
        const Census c = find_critical_points(land);
        report["zero_noise"] = to_json(zero_noise_weights(land, c, a.zero_noise, a.ball, a.grid));
    }
    if (land.dimension() == 2) {
        std::vector<double> dens(gm.grid.cells());
        for (std::size_t c = 0; c < dens.size(); ++c) dens[c] = gm.density(c);
        out.file("gibbs.csv", csv_of([&](std::ostream& os) { write_density_csv(os, gm.grid, dens); }));
    }
    return ok;
}

struct LangevinArgs {
    LandscapeArgs land;
    double eps = 0.7;
    double dt = 1e-3;
    std::size_t steps = 2000000;
    std::size_t burn_in = 10000;
    int grid = 50;
    std::uint64_t seed = 0;
    double tv_max = 0.1;
};

int cmd_langevin(const LangevinArgs& a, Json& report) {
    const Landscape land = resolve_landscape(a.land);
    const EmpiricalMeasure em = empirical_invariant_measure(land, a.eps, a.dt, a.steps, a.burn_in, a.seed, a.grid);
    report["epsilon"] = num(a.eps);
    report["samples"] = em.samples;
    report["tv_to_gibbs"] = num(em.tv_to_gibbs);
    const bool pass = em.tv_to_gibbs < a.tv_max;
    report["verdict"] = pass ? "pass" : "fail";
    if (land.dimension() == 2) {
        std::vector<double> dens(em.histogram.size());
        for (std::size_t c = 0; c < dens.size(); ++c) dens[c] = em.histogram[c] / em.grid.cell_volume();
        out.file("histogram.csv", csv_of([&](std::ostream& os) { write_density_csv(os, em.grid, dens); }));
    }
    return pass ? ok : verdict_failed;
}

struct ActionArgs {
    LandscapeArgs land;
    std::vector<double> eps{0.0};
    std::vector<double> x0{0.5, 0.5};
    double dt = 1e-3;
    std::size_t steps = 2000;
    std::uint64_t seed = 0;
};

int cmd_action(const ActionArgs& a, Json& report, const CLI::Option* seed_opt) {
    const Landscape land = resolve_landscape(a.land);
    Vec x0 = Vec::Zero(land.dimension());
    for (Eigen::Index i = 0; i < x0.size() && i < static_cast<Eigen::Index>(a.x0.size()); ++i) x0[i] = a.x0[i];
    Json rows = Json::array();
    for (std::size_t k = 0; k < a.eps.size(); ++k) {
        if (a.eps[k] < 0.0) throw ConfigError("--eps must be nonnegative");
        if (a.eps[k] > 0.0) require_seed(seed_opt, "action with eps > 0");
        const TrajectoryRecord path = euler_maruyama(land, a.eps[k], x0, a.dt, a.steps, a.seed, k);
        rows.push_back(Json{{"epsilon", num(a.eps[k])}, {"action", num(fw_action(land, path))}});
        if (k == 0) out.file("path.csv", csv_of([&](std::ostream& os) { write_trajectory_csv(os, path); }));
    }
    report["actions"] = rows;
    return ok;
}

struct HopfieldArgs {
    std::string patterns, weights, probes;
    double rate = 0.1, c = 1.0, tol = 1e-12;
    std::vector<double> rinv{0.0};
    std::string activation = "tanh";
    double threshold = 1e-8;
    double noise = 0.3;
    int trials = 0;
    std::uint64_t seed = 0;
};

HopfieldNet net_from(const HopfieldArgs& a, const Mat& W) {
    const Activation act = activation_from_string(a.activation);
    Vec r = Vec::Constant(W.rows(), a.rinv.front());
    if (a.rinv.size() > 1) r = Eigen::Map<const Vec>(a.rinv.data(), static_cast<Eigen::Index>(a.rinv.size()));
    return make_hopfield(W, r, act);
}

int cmd_hopfield_train(const HopfieldArgs& a, Json& report) {
    if (a.patterns.empty()) throw ConfigError("--patterns is required");
    const Mat P = read_matrix_csv(a.patterns);
    HebbianOptions opt;
    opt.rate = a.rate;
    opt.c = a.c;
    opt.tol = a.tol;
    opt.seed = a.seed;
    const HebbianResult r = hebbian_pgd(P, opt);
    report["iterations"] = r.iterations;
    report["frobenius_norm"] = num(r.W.norm());
    report["cosine_to_outer_product"] = num(matrix_cosine(r.W, outer_product_rule(P)));
    report["W"] = to_json(r.W);
    out.file("W.csv", csv_of([&](std::ostream& os) { write_matrix_csv(os, r.W); }));
    return ok;
}

int cmd_hopfield_recall(const HopfieldArgs& a, Json& report, const CLI::Option* seed_opt) {
    if (a.weights.empty()) throw ConfigError("--weights is required");
    const HopfieldNet net = net_from(a, read_matrix_csv(a.weights));
    Json results = Json::array();
    std::vector<Vec> finals;
    if (!a.probes.empty()) {
        for (const Vec& v0 : rows_of(read_matrix_csv(a.probes))) {
            const RecallResult r = recall(net, clip_to_range(net, v0));
            results.push_back(Json{{"start", to_json(v0)},
                                   {"point", to_json(r.point)},
                                   {"sign_pattern", to_json(sign_pattern(r.point))},
                                   {"reached_boundary", r.reached_boundary}});
            finals.push_back(r.point);
        }
        report["recalls"] = results;
    }
    if (a.trials > 0) {
        require_seed(seed_opt, "noisy recall");
        if (a.patterns.empty()) throw ConfigError("--trials needs --patterns");
        const auto pats = rows_of(read_matrix_csv(a.patterns));
        std::vector<int> hit(static_cast<std::size_t>(a.trials), 0);
        parallel_for(hit.size(), [&](std::size_t k) {
            auto rng = make_stream(a.seed, k);
            std::normal_distribution<double> nd(0.0, a.noise);
            const Vec& xi = pats[k % pats.size()];
            Vec v0 = 0.7 * xi;
            for (Eigen::Index i = 0; i < v0.size(); ++i) v0[i] += nd(rng);
            const RecallResult r = recall(net, clip_to_range(net, v0));
            hit[k] = sign_pattern(r.point) == sign_pattern(xi) ? 1 : 0;
        });
        int s = 0;
        for (int h : hit) s += h;
        report["trials"] = a.trials;
        report["recovered"] = s;
    }
    if (!finals.empty()) out.file("recall.csv", csv_of([&](std::ostream& os) { write_points_csv(os, finals); }));
    return ok;
}

int cmd_hopfield_check(const HopfieldArgs& a, Json& report) {
    if (a.weights.empty()) throw ConfigError("--weights is required");
    const Mat W = read_matrix_csv(a.weights);
    const bool zero_r = std::all_of(a.rinv.begin(), a.rinv.end(), [](double r) { return r == 0.0; });
    StabilityReport r;
    if (zero_r) {
        // The weight test applies to any symmetric matrix, diagonal included.
        if (!W.isApprox(W.transpose(), 0.0)) throw ConfigError("weight matrix must be symmetric");
        r = weight_rank_check(W, a.threshold);
    } else {
        StabilityOptions opt;
        opt.threshold = a.threshold;
        opt.seed = a.seed;
        std::vector<Vec> pats;
        if (!a.patterns.empty()) pats = rows_of(read_matrix_csv(a.patterns));
        r = stability_check(net_from(a, W), pats, opt);
    }
    report["weight_test"] = r.weight_test;
    if (r.weight_test) report["weight_eigenvalues"] = to_json(r.weight_eigenvalues);
    Json fps = Json::array();
    for (const auto& p : r.fixed_points)
        fps.push_back(Json{{"v", to_json(p.v)},
                           {"hessian_eigenvalues", to_json(p.hessian_eigenvalues)},
                           {"index", p.index}});
    if (!r.weight_test) report["fixed_points"] = fps;
    report["min_abs_eigenvalue"] = num(r.min_abs_eigenvalue);
    report["threshold"] = num(r.threshold);
    report["verdict"] = r.verdict();
    return r.structurally_stable ? ok : verdict_failed;
}

struct MhnArgs {
    std::string patterns;
    std::vector<double> beta{1.0};
    int seeds = 400;
    int points = 1000;
    int grid = 100;
    std::uint64_t seed = 0;
};

ModernHopfield mhn_from(const MhnArgs& a, double beta) {
    if (a.patterns.empty()) throw ConfigError("--patterns is required");
    return make_modern_hopfield(read_matrix_csv(a.patterns).transpose(), beta);
}

int cmd_mhn_census(const MhnArgs& a, Json& report) {
    const ModernHopfield m = mhn_from(a, a.beta.front());
    const auto cs = mh_attractor_census(m, a.beta, mh_default_seeds(m, static_cast<std::size_t>(a.seeds)));
    Json rows = Json::array();
    for (const auto& c : cs) {
        Json at = Json::array();
        for (const auto& x : c.attractors) at.push_back(to_json(x));
        rows.push_back(Json{{"beta", num(c.beta)},
                            {"attractor_count", c.attractors.size()},
                            {"attractors", at},
                            {"basin_counts", c.basin_counts},
                            {"dropped", c.dropped}});
    }
    report["census"] = rows;
    return ok;
}

int cmd_mhn_check(const MhnArgs& a, Json& report) {
    const ModernHopfield m = mhn_from(a, a.beta.front());
    std::vector<Vec> fps;
    for (const auto& c : mh_attractor_census(m, {m.beta}, mh_default_seeds(m))) fps = c.attractors;
    const MhRankReport r = mh_rank_check(m, fps);
    // Jacobian rank at scattered points in the disc.
    int worst = 0;
    for (int k = 0; k < a.points; ++k) {
        const Vec h = halton(static_cast<std::uint64_t>(k) + 1, m.dimension());
        const Vec x = m.C() * (2.0 * h.array() - 1.0).matrix();
        worst = std::max(worst, numeric_rank(mh_jacobian(m, x)));
    }
    report["M"] = r.M;
    report["d"] = r.d;
    report["rank_xi"] = r.rank_xi;
    report["max_jacobian_rank"] = worst;
    report["necessary_condition"] = r.necessary_ok;
    Json fp = Json::array();
    for (const auto& c : r.fixed_points)
        fp.push_back(Json{{"point", to_json(c.point)},
                          {"min_singular_value", num(c.min_singular_value)},
                          {"degenerate", c.degenerate}});
    report["fixed_points"] = fp;
    bool deg = false;
    for (const auto& c : r.fixed_points) deg = deg || c.degenerate;
    const bool pass = r.necessary_ok && !deg;
    report["verdict"] = pass ? "pass" : "fail";
    return pass ? ok : verdict_failed;
}

int cmd_mhn_energy(const MhnArgs& a, Json& report) {
    const ModernHopfield m = mhn_from(a, a.beta.front());
    if (m.dimension() != 2) throw ConfigError("energy grids need two-dimensional patterns");
    const double r = m.C() + 0.5;
    std::ostringstream os;
    os << "x1,x2,energy\n" << std::setprecision(12);
    for (int i = 0; i < a.grid; ++i)
        for (int j = 0; j < a.grid; ++j) {
            const double x = -r + 2.0 * r * (i + 0.5) / a.grid, y = -r + 2.0 * r * (j + 0.5) / a.grid;
            os << x << ',' << y << ',' << mh_energy(m, Vec(Eigen::Vector2d(x, y))) << '\n';
        }
    out.file("energy.csv", os.str());
    report["beta"] = num(m.beta);
    report["grid"] = a.grid;
    report["radius"] = num(r);
    return ok;
}

struct DiffusionArgs {
    SweepArgs gmm;
    std::size_t samples = 4000;
    std::size_t steps = 1000;
    std::uint64_t seed = 0;
    int points = 200;
};

int cmd_diffusion_generate(const DiffusionArgs& a, Json& report) {
    const GmmData d = resolve_gmm(a.gmm);
    const NoiseSchedule s = make_schedule(schedule_kind_from_string(a.gmm.schedule), a.gmm.beta_min, a.gmm.beta_max);
    const auto xs = reverse_sde_sample(d, s, a.samples, a.steps, a.seed);
    const ClusterSummary cs = cluster_by_centroid(d, xs);
    Json means = Json::array();
    for (const auto& m : cs.means) means.push_back(to_json(m));
    report["samples"] = a.samples;
    report["cluster_means"] = means;
    report["occupancy"] = to_json(cs.occupancy);
    report["max_mean_error"] = num(cs.max_mean_error);
    report["min_occupancy"] = num(cs.min_occupancy);
    out.file("samples.csv", csv_of([&](std::ostream& os) { write_points_csv(os, xs); }));
    return ok;
}

int cmd_diffusion_cascade(const DiffusionArgs& a, Json& report) {
    SweepArgs sa = a.gmm;
    sa.family = "diffusion-cascade";
    sa.grid = a.points;
    return cmd_sweep(sa, report);
}

void add_gmm_options(CLI::App* cmd, SweepArgs& a) {
    cmd->add_option("--gmm", a.gmm, "builtin mixture (four-centroids)")->capture_default_str();
    cmd->add_option("--centroids", a.centroids, "CSV of centroids, one per row (equal weights)");
    cmd->add_option("--sigma0", a.sigma0, "component standard deviation")->capture_default_str();
    cmd->add_option("--schedule", a.schedule, "VP, subVP or VE")->capture_default_str();
    cmd->add_option("--beta-min", a.beta_min)->capture_default_str();
    cmd->add_option("--beta-max", a.beta_max)->capture_default_str();
    cmd->add_option("--t-min", a.t_min, "smallest forward time in the cascade")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Morse-Smale landscape analysis"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version);
    int threads = 0;
    std::string out_dir;
    app.add_option("--threads", threads, "worker threads (default: MORSELAND_THREADS or 1)");
    app.add_option("--out", out_dir, "directory for report.json, manifest.json and artifacts");

    AnalyzeArgs analyze_a, dag_a;
    auto* analyze = app.add_subcommand("analyze", "census, DAG, Morse, Poincare-Hopf and transversality report");
    add_landscape_options(analyze, analyze_a.land);
    analyze->add_option("--grid", analyze_a.grid, "Newton seed lattice density per axis")->capture_default_str();
    analyze->add_option("--hyperbolic", analyze_a.hyperbolic, "min |eigenvalue| counted as hyperbolic")
        ->capture_default_str();
    auto* dag = app.add_subcommand("dag", "separatrix DAG as JSON (DOT on stderr)");
    add_landscape_options(dag, dag_a.land);
    dag->add_option("--grid", dag_a.grid)->capture_default_str();

    SweepArgs sweep_a;
    auto* sw = app.add_subcommand("sweep", "one-parameter bifurcation sweep");
    sw->add_option("--family", sweep_a.family, "saddle-node, flip or diffusion-cascade")->capture_default_str();
    sw->add_option("--range", sweep_a.range)->expected(2)->capture_default_str();
    sw->add_option("--grid", sweep_a.grid, "grid values (cascade: backward-time values)")->capture_default_str();
    sw->add_option("--census-grid", sweep_a.census_grid)->capture_default_str();
    sw->add_option("--tol", sweep_a.tol, "bisection tolerance")->capture_default_str();
    add_gmm_options(sw, sweep_a);

    GibbsArgs gibbs_a;
    auto* gibbs = app.add_subcommand("gibbs", "Gibbs density on a grid");
    add_landscape_options(gibbs, gibbs_a.land);
    gibbs->add_option("--eps", gibbs_a.eps)->capture_default_str();
    gibbs->add_option("--grid", gibbs_a.grid)->capture_default_str();
    gibbs->add_option("--zero-noise", gibbs_a.zero_noise, "decreasing noise levels for the concentration report");
    gibbs->add_option("--ball", gibbs_a.ball, "attractor ball radius")->capture_default_str();

    LangevinArgs lang_a;
    auto* lang = app.add_subcommand("langevin", "Euler-Maruyama occupation measure against the Gibbs measure");
    add_landscape_options(lang, lang_a.land);
    lang->add_option("--eps", lang_a.eps)->capture_default_str();
    lang->add_option("--dt", lang_a.dt)->capture_default_str();
    lang->add_option("--steps", lang_a.steps)->capture_default_str();
    lang->add_option("--burn-in", lang_a.burn_in)->capture_default_str();
    lang->add_option("--grid", lang_a.grid)->capture_default_str();
    lang->add_option("--tv-max", lang_a.tv_max)->capture_default_str();
    auto* lang_seed = lang->add_option("--seed", lang_a.seed);

    ActionArgs act_a;
    auto* act = app.add_subcommand("action", "Freidlin-Wentzell action of simulated paths");
    add_landscape_options(act, act_a.land);
    act->add_option("--eps", act_a.eps)->capture_default_str();
    act->add_option("--x0", act_a.x0)->capture_default_str();
    act->add_option("--dt", act_a.dt)->capture_default_str();
    act->add_option("--steps", act_a.steps)->capture_default_str();
    auto* act_seed = act->add_option("--seed", act_a.seed);

    HopfieldArgs hop_a;
    auto* hop = app.add_subcommand("hopfield", "continuous Hopfield networks");
    hop->require_subcommand(1);
    auto* train = hop->add_subcommand("train", "projected Hebbian learning");
    train->add_option("--patterns", hop_a.patterns, "CSV, one pattern per row");
    train->add_option("--rate", hop_a.rate)->capture_default_str();
    train->add_option("--c", hop_a.c, "Frobenius radius")->capture_default_str();
    train->add_option("--tol", hop_a.tol)->capture_default_str();
    train->add_option("--seed", hop_a.seed, "initial-weight seed")->capture_default_str();
    auto* rec = hop->add_subcommand("recall", "feature dynamics from probe states");
    rec->add_option("--weights", hop_a.weights);
    rec->add_option("--rinv", hop_a.rinv)->capture_default_str();
    rec->add_option("--activation", hop_a.activation)->capture_default_str();
    rec->add_option("--probes", hop_a.probes, "CSV of initial feature states");
    rec->add_option("--patterns", hop_a.patterns, "stored patterns for noisy trials");
    rec->add_option("--trials", hop_a.trials)->capture_default_str();
    rec->add_option("--noise", hop_a.noise)->capture_default_str();
    auto* rec_seed = rec->add_option("--seed", hop_a.seed);
    auto* chk = hop->add_subcommand("check", "structural stability verdict");
    chk->add_option("--weights", hop_a.weights);
    chk->add_option("--rinv", hop_a.rinv)->capture_default_str();
    chk->add_option("--activation", hop_a.activation)->capture_default_str();
    chk->add_option("--threshold", hop_a.threshold)->capture_default_str();
    chk->add_option("--patterns", hop_a.patterns, "extra Newton seeds");
    chk->add_option("--seed", hop_a.seed)->capture_default_str();

    MhnArgs mhn_a;
    auto* mhn = app.add_subcommand("mhn", "modern Hopfield networks");
    mhn->require_subcommand(1);
    auto* mcen = mhn->add_subcommand("census", "attractors of the update map per beta");
    auto* mchk = mhn->add_subcommand("check", "rank conditions");
    auto* meng = mhn->add_subcommand("energy", "energy grid CSV");
    for (auto* c : {mcen, mchk, meng}) {
        c->add_option("--patterns", mhn_a.patterns, "CSV, one pattern per row");
        c->add_option("--beta", mhn_a.beta)->capture_default_str();
    }
    mcen->add_option("--seeds", mhn_a.seeds)->capture_default_str();
    mchk->add_option("--points", mhn_a.points, "Jacobian rank sample points")->capture_default_str();
    meng->add_option("--grid", mhn_a.grid)->capture_default_str();

    DiffusionArgs dif_a;
    auto* dif = app.add_subcommand("diffusion", "diffusion-model landscapes");
    dif->require_subcommand(1);
    auto* gen = dif->add_subcommand("generate", "reverse-SDE samples");
    add_gmm_options(gen, dif_a.gmm);
    gen->add_option("--samples", dif_a.samples)->capture_default_str();
    gen->add_option("--steps", dif_a.steps)->capture_default_str();
    auto* gen_seed = gen->add_option("--seed", dif_a.seed);
    auto* casc = dif->add_subcommand("cascade", "bifurcation cascade in backward time");
    add_gmm_options(casc, dif_a.gmm);
    casc->add_option("--points", dif_a.points)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return usage;
    }

    Json report;
    int code = ok;
    try {
        if (threads < 0) throw ConfigError("--threads must be nonnegative");
        if (threads > 0) set_thread_count(threads);
        out.dir = out_dir;
        if (!out.dir.empty()) fs::create_directories(out.dir);
        report["config"] = resolved_config(app);

        if (*analyze) code = cmd_analyze(analyze_a, report, false);
        else if (*dag) code = cmd_analyze(dag_a, report, true);
        else if (*sw) code = cmd_sweep(sweep_a, report);
        else if (*gibbs) code = cmd_gibbs(gibbs_a, report);
        else if (*lang) {
            require_seed(lang_seed, "langevin");
            code = cmd_langevin(lang_a, report);
        } else if (*act) code = cmd_action(act_a, report, act_seed);
        else if (*train) code = cmd_hopfield_train(hop_a, report);
        else if (*rec) code = cmd_hopfield_recall(hop_a, report, rec_seed);
        else if (*chk) code = cmd_hopfield_check(hop_a, report);
        else if (*mcen) code = cmd_mhn_census(mhn_a, report);
        else if (*mchk) code = cmd_mhn_check(mhn_a, report);
        else if (*meng) code = cmd_mhn_energy(mhn_a, report);
        else if (*gen) {
            require_seed(gen_seed, "diffusion generate");
            code = cmd_diffusion_generate(dif_a, report);
        } else if (*casc) code = cmd_diffusion_cascade(dif_a, report);

        report["exit_code"] = code;
        const std::string text = report.dump(2) + "\n";
        std::cout << text;
        out.file("report.json", text);
        if (!out.dir.empty()) {
            Json manifest{{"version", version}, {"config", report["config"]}, {"artifacts", out.artifacts},
                          {"exit_code", code}};
            out.file("manifest.json", manifest.dump(2) + "\n");
        }
        return code;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return usage;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return usage;
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return internal;
    }
}
