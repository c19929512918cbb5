// Acceptance run: one PASS/FAIL line per criterion. Exit status is nonzero if
// any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "cpsdiag/diagnosis.hpp"
#include "cpsdiag/graph_io.hpp"
#include "cpsdiag/harness.hpp"
#include "cpsdiag/ingest.hpp"
#include "cpsdiag/residual_model.hpp"
#include "cpsdiag/simulator.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"

using namespace cpsdiag;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int digits = 4) {
    std::ostringstream os;
    os.precision(digits);
    os << std::fixed << v;
    return os.str();
}

// ---- 1: oracle equivalence ---------------------------------------------------

struct OracleTally {
    std::size_t graphs = 0, cases = 0, mismatches = 0;
    std::string first_mismatch;
};

const CriterionWeights kOracleWeights{0.1, 0.2, 0.3, 0.4};

void check_graph(const oracle::Digraph& d, std::mt19937_64& rng, OracleTally& tally) {
    const auto g = fixtures::to_graph(d);
    ++tally.graphs;
    for (std::uint32_t pattern = 1; pattern < (1u << d.n); ++pattern) {
        std::vector<bool> targets(d.n), anomalous(d.n);
        const std::uint32_t extra = static_cast<std::uint32_t>(rng()) & ((1u << d.n) - 1);
        SubsystemSet sym;
        HealthStateVector h;
        for (int i = 0; i < d.n; ++i) {
            targets[i] = (pattern >> i) & 1u;
            // Half of the cases use an anomaly vector wider than the targets,
            // as in later diagnosis iterations.
            anomalous[i] = targets[i] || ((pattern & 1u) && ((extra >> i) & 1u));
            if (targets[i]) sym.insert(g.name(i));
            h.states[g.name(i)] = anomalous[i];
        }
        const auto cands = candidate_set(g, sym);
        for (int c = 0; c < d.n; ++c) {
            bool expect_candidate = false;
            for (int s = 0; s < d.n; ++s) expect_candidate = expect_candidate || (targets[s] && oracle::reaches(d, c, s));
            const bool is_candidate = cands.count(g.name(c)) > 0;
            ++tally.cases;
            if (expect_candidate != is_candidate) {
                if (tally.mismatches++ == 0) tally.first_mismatch = "candidate_set differs at " + g.name(c);
                continue;
            }
            if (!is_candidate) continue;
            const auto want = oracle::score(d, c, targets, anomalous);
            const auto got = score_candidate(g, g.name(c), sym, h, kOracleWeights);
            const double total = kOracleWeights.reach * want.reach + kOracleWeights.dist * want.dist +
                                 kOracleWeights.anom * want.anom + kOracleWeights.chain * want.chain;
            const double err = std::max({std::abs(got.reach - want.reach), std::abs(got.dist - want.dist),
                                         std::abs(got.anom - want.anom), std::abs(got.chain - want.chain),
                                         std::abs(got.total - total)});
            if (err > 1e-12 && tally.mismatches++ == 0)
                tally.first_mismatch = "score differs at " + g.name(c) + " by " + std::to_string(err);
        }
    }
}

// Smallest edge mask over all relabelings of a 5-node digraph.
std::uint32_t canonical5(std::uint32_t mask, const std::vector<std::array<int, 5>>& perms) {
    std::array<std::array<int, 5>, 5> bit{};
    int k = 0;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
            if (i != j) bit[i][j] = k++;
    std::uint32_t best = mask;
    for (const auto& p : perms) {
        std::uint32_t m = 0;
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j)
                if (i != j && ((mask >> bit[i][j]) & 1u)) m |= 1u << bit[p[i]][p[j]];
        best = std::min(best, m);
    }
    return best;
}

Outcome criterion1() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(1);
    OracleTally tally;
    // Every labeled digraph on up to 4 nodes.
    for (int n = 1; n <= 4; ++n)
        for (std::uint64_t mask = 0; mask < (1ull << (n * (n - 1))); ++mask)
            check_graph(oracle::Digraph::from_mask(n, mask), rng, tally);
    // Every 5-node digraph up to isomorphism.
    std::vector<std::array<int, 5>> perms;
    std::array<int, 5> p{0, 1, 2, 3, 4};
    do perms.push_back(p);
    while (std::next_permutation(p.begin(), p.end()));
    std::size_t classes = 0;
    for (std::uint32_t mask = 0; mask < (1u << 20); ++mask) {
        if (canonical5(mask, perms) != mask) continue;
        ++classes;
        check_graph(oracle::Digraph::from_mask(5, mask), rng, tally);
    }
    // Random 6-node digraphs over a spread of densities.
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 600; ++i) {
        const double density = 0.1 + 0.6 * (i % 10) / 9.0;
        std::uint64_t mask = 0;
        for (int k = 0; k < 30; ++k)
            if (unit(rng) < density) mask |= 1ull << k;
        check_graph(oracle::Digraph::from_mask(6, mask), rng, tally);
    }
    const double secs = seconds_since(t0);
    Outcome o;
    o.pass = tally.mismatches == 0 && secs < 300.0;
    o.detail = std::to_string(tally.graphs) + " graphs (" + std::to_string(classes) + " 5-node classes), " +
               std::to_string(tally.cases) + " candidate checks, " + std::to_string(tally.mismatches) +
               " mismatches, " + fmt(secs, 1) + " s";
    if (!tally.first_mismatch.empty()) o.detail += "; first: " + tally.first_mismatch;
    return o;
}

// ---- 2: chain fixture --------------------------------------------------------

Outcome criterion2() {
    const auto g = fixtures::chain_abc();
    const auto h = fixtures::health(g, {"B", "C"});
    const auto w = CriterionWeights::equal();
    std::vector<std::string> problems;
    const auto r1 = diagnose(g, h, w, 1.0);
    if (r1.root_causes != SubsystemSet{"B"}) problems.push_back("theta 1.0 does not give {B}");
    if (r1.iterations.empty() || r1.iterations[0].sigma_max != 0.9375) problems.push_back("sigma_max != 0.9375");
    if (r1.iterations.size() != 1) problems.push_back("expected one iteration");
    const std::vector<std::pair<double, SubsystemSet>> expect = {
        {0.67, {"B"}}, {0.66, {"B", "C"}}, {0.65, {"B", "C"}}, {0.64, {"A", "B", "C"}}, {0.0, {"A", "B", "C"}}};
    for (const auto& [theta, set] : expect)
        if (diagnose(g, h, w, theta).root_causes != set) problems.push_back("theta " + fmt(theta, 2) + " mismatch");
    // Totals against the path-enumeration oracle.
    oracle::Digraph d(3);
    d.adj[0][1] = d.adj[1][2] = true;
    const std::vector<bool> sym{false, true, true};
    const std::array<double, 3> hand{0.60416666666666667, 0.9375, 0.625};
    for (int c = 0; c < 3; ++c) {
        const auto s = oracle::score(d, c, sym, sym);
        const double total = 0.25 * (s.reach + s.dist + s.anom + s.chain);
        const auto got = score_candidate(g, g.name(c), {"B", "C"}, h, w);
        if (std::abs(total - hand[c]) > 1e-12 || std::abs(got.total - hand[c]) > 1e-12)
            problems.push_back("score of " + g.name(c));
    }
    Outcome o;
    o.pass = problems.empty();
    o.detail = o.pass ? "{B} at theta 1.0, sigma_max 0.9375, C at 0.66, A at 0.64" : problems.front();
    return o;
}

// ---- 3: theta sweep properties -------------------------------------------------

Outcome criterion3() {
    std::vector<std::string> problems;
    std::size_t warnings = 0;
    const auto thetas = default_thetas();
    for (const auto& sc : canonical_scenarios()) {
        const auto sym = sc.health.symptomatic();
        const auto w = CriterionWeights::equal();
        if (diagnose(sc.graph, sc.health, w, 1.0).root_causes.empty()) problems.push_back(sc.name + ": empty at 1.0");
        const auto r0 = diagnose(sc.graph, sc.health, w, 0.0);
        SubsystemSet positive;
        for (const auto& s : r0.iterations.at(0).scores)
            if (s.total > 0.0) positive.insert(s.candidate);
        if (r0.iterations.at(0).selected != positive) problems.push_back(sc.name + ": theta 0 not inclusive");
        for (double theta : thetas) {
            const auto r = diagnose(sc.graph, sc.health, w, theta);
            for (const auto& s : sym) {
                bool explained = false;
                for (const auto& c : r.root_causes) explained = explained || reachable_set(sc.graph, c).count(s) > 0;
                if (!explained) problems.push_back(sc.name + ": " + s + " unexplained at " + fmt(theta, 1));
            }
        }
        warnings += theta_sweep(sc.graph, sc.health, w, thetas).warnings.size();
    }
    Outcome o;
    o.pass = problems.empty();
    o.detail = o.pass ? "4 scenarios, " + std::to_string(thetas.size()) + " thetas, " + std::to_string(warnings) +
                            " nesting warnings"
                      : problems.front();
    return o;
}

// ---- 4: experiment 2 ------------------------------------------------------------

Outcome criterion4() {
    const auto t0 = Clock::now();
    Experiment2Config c;
    c.n_trials = 100;
    c.seed = 0;
    c.trial.min_nodes = 5;
    c.trial.max_nodes = 50;
    c.trial.min_scale = 3.0;
    c.trial.max_scale = 10.0;
    c.theta = 0.9;
    c.weights = CriterionWeights::equal();
    const auto r = run_experiment2(c);
    const double secs = seconds_since(t0);
    Outcome o;
    o.pass = r.inclusion_rate >= 0.70 && r.reduction_rate >= 0.55 && secs < 900.0;
    o.detail = r.summary() + ", " + fmt(secs, 1) + " s";
    return o;
}

// ---- 5: detection --------------------------------------------------------------

Outcome criterion5() {
    DetectionConfig c;
    c.n_trials = 50;
    c.seed = 0;
    c.trial.min_scale = c.trial.max_scale = 5.0;
    c.trial.min_noise = 0.01;
    c.trial.max_noise = 0.02;
    const auto r = run_detection_study(c);
    Outcome o;
    o.pass = r.completed > 0 && r.detection_rate >= 0.90 && r.false_flag_rate <= 0.02;
    o.detail = "completed " + std::to_string(r.completed) + "/50, detection " + fmt(r.detection_rate, 3) +
               ", false-flag rate " + fmt(r.false_flag_rate, 4);
    return o;
}

// ---- 6: simulator numerics -------------------------------------------------------

Outcome criterion6() {
    std::vector<std::string> problems;
    LtiSystem decay;
    decay.A = -Eigen::MatrixXd::Identity(1, 1);
    decay.B = Eigen::MatrixXd::Zero(1, 1);
    decay.blocks = {{"X", 0, 1}};
    SimulationOptions opts;
    opts.dt = 0.01;
    opts.horizon = 501;
    opts.initial_state = Eigen::VectorXd::Ones(1);
    const auto f = simulate(decay, opts, 0);
    double rk_err = 0.0;
    for (std::size_t i = 0; i < f.rows(); ++i)
        rk_err = std::max(rk_err, std::abs(f.values(static_cast<Eigen::Index>(i), 0) - std::exp(-0.01 * i)));
    if (rk_err > 1e-6) problems.push_back("RK4 error " + std::to_string(rk_err));

    std::size_t systems = 0;
    double worst = -1e300;
    for (int i = 0; i < 60; ++i) {
        const std::size_t n = 2 + (i * 7) % 59;
        const bool cyclic = i % 2 == 0;
        const double density = std::max(0.1, 1.0 / n) + 0.05 * (i % 3);
        const auto g = sample_graph(n, std::min(density, 1.0), cyclic, derive_seed(11, i));
        SystemConfig sc;
        sc.damping = 0.5 + 0.25 * (i % 4);
        sc.edge_gain = 1.0 + (i % 3);
        const auto sys = build_system(g, sc, derive_seed(12, i));
        ++systems;
        for (const auto& rb : sys.blocks)
            for (const auto& cb : sys.blocks) {
                if (rb.id == cb.id) continue;
                const bool allowed = g.has_edge(g.index_of(cb.id), g.index_of(rb.id));
                const auto blk = sys.A.block(rb.first, cb.first, rb.count, cb.count);
                if (!allowed && (blk.array() != 0.0).any())
                    problems.push_back("block (" + rb.id + ", " + cb.id + ") nonzero without an edge");
            }
        const double abscissa = spectral_abscissa(sys.A);
        worst = std::max(worst, abscissa + sc.damping / 2.0);
        if (abscissa > -sc.damping / 2.0) problems.push_back("abscissa above -damping/2");
    }
    Outcome o;
    o.pass = problems.empty();
    o.detail = o.pass ? "RK4 max error " + std::to_string(rk_err) + ", " + std::to_string(systems) +
                            " systems mask-exact, max(abscissa + damping/2) = " + fmt(worst, 3)
                      : problems.front();
    return o;
}

// ---- 7: performance envelope ---------------------------------------------------------

SubsystemSet pick_symptoms(const CausalGraph& g, std::size_t k, std::uint64_t seed) {
    std::vector<std::size_t> idx(g.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    SubsystemSet s;
    for (std::size_t i = 0; i < k; ++i) s.insert(g.name(idx[i]));
    return s;
}

Outcome criterion7() {
    std::vector<std::string> problems;
    const auto g = sample_graph(100, 500.0 / 9900.0, true, 7);
    if (g.edge_count() != 500) problems.push_back("graph has " + std::to_string(g.edge_count()) + " edges");
    const auto h = fixtures::health(g, pick_symptoms(g, 20, 7));
    const auto t0 = Clock::now();
    const auto r = diagnose(g, h, CriterionWeights::equal(), 0.9);
    const double secs = seconds_since(t0);
    if (secs >= 1.0) problems.push_back("diagnose took " + fmt(secs, 3) + " s");

    // Traversal work at 25/50/100 nodes (5 edges and one symptom per 5 nodes).
    std::vector<double> work;
    for (std::size_t n : {25, 50, 100}) {
        double total = 0.0;
        for (std::uint64_t s = 0; s < 5; ++s) {
            const auto gs = sample_graph(n, 5.0 * n / (n * (n - 1.0)), true, derive_seed(n, s));
            const auto hs = fixtures::health(gs, pick_symptoms(gs, n / 5, derive_seed(n + 1, s)));
            const auto rs = diagnose(gs, hs, CriterionWeights::equal(), 0.9);
            total += static_cast<double>(rs.stats.traversal.nodes_visited + rs.stats.traversal.edges_scanned);
        }
        work.push_back(total / 5.0);
    }
    const double r50 = work[1] / work[0], r100 = work[2] / work[0];
    if (r50 > 3.0 * 4.0) problems.push_back("50/25 work ratio " + fmt(r50, 2));
    if (r100 > 3.0 * 16.0) problems.push_back("100/25 work ratio " + fmt(r100, 2));
    Outcome o;
    o.pass = problems.empty();
    o.detail = "100-node/500-edge diagnose " + fmt(secs * 1000.0, 2) + " ms (" + std::to_string(r.root_causes.size()) +
               " causes); work ratios 50/25 = " + fmt(r50, 2) + " (<= 12), 100/25 = " + fmt(r100, 2) + " (<= 48)";
    if (!problems.empty()) o.detail += "; " + problems.front();
    return o;
}

// ---- 8: CLI determinism ---------------------------------------------------------------

int run(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome criterion8() {
    fixtures::TempDir tmp("accept8");
    const std::string cli = CPSDIAG_CLI;
    const auto fx = fixtures::make_swat_fixture(3);
    write_csv(tmp / "swat_nominal.csv", fx.nominal);
    write_csv(tmp / "swat_attack.csv", fx.attacked);
    write_text_file(tmp / "attacks.json", fx.attacks.dump());
    write_text_file(tmp / "health.json", R"({"A":0,"B":1,"C":1})");
    write_text_file(tmp / "chain.json", R"({"nodes":["A","B","C"],"edges":[["A","B"],["B","C"]]})");

    // Each command writes into the directory given as {}; run twice and compare.
    const std::string T = tmp.path.string();
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"simulate", "simulate --seed 5 --min-nodes 6 --max-nodes 12 --out {}/trial"},
        {"fit", "fit --trial " + T + "/ref --out {}/model.json"},
        {"fit-ae", "fit --trial " + T + "/ref --model-type autoencoder --epochs 20 --latent 4 --out {}/ae.json"},
        {"calibrate", "calibrate --model " + T + "/ref/model.json --trial " + T + "/ref --out {}/bin.json"},
        {"detect", "detect --model " + T + "/ref/model.json --config " + T + "/ref/bin.json --trial " + T +
                       "/ref > {}/detect.jsonl"},
        {"diagnose", "diagnose --graph " + T + "/chain.json --health " + T + "/health.json --dot {}/d.dot > {}/d.json"},
        {"pipeline", "pipeline --graph " + T + "/ref/graph.json --model " + T + "/ref/model.json --config " + T +
                         "/ref/bin.json --group-incidents --input " + T + "/ref/test.csv > {}/pipe.jsonl"},
        {"sweep", "sweep --scenario cyclic_multi > {}/sweep.csv"},
        {"exp1", "exp1 --out {}/exp1.json"},
        {"exp2", "exp2 --trials 4 --min-nodes 5 --max-nodes 10 --seed 3 --out {}/exp2.json 2> /dev/null"},
        {"ingest", "ingest --telemetry " + T + "/swat_attack.csv --attacks " + T + "/attacks.json --nominal " + T +
                       "/swat_nominal.csv --graph " + CPSDIAG_SOURCE_DIR "/configs/swat/graph.json --preset swat > {}/ingest.csv"},
    };
    // A reference trial directory feeds the downstream commands.
    if (run(cli + " simulate --seed 5 --min-nodes 6 --max-nodes 12 --out " + T + "/ref") != 0)
        return {false, "simulate failed"};
    std::vector<std::string> problems;
    auto expand = [](std::string s, const std::string& dir) {
        for (auto pos = s.find("{}"); pos != std::string::npos; pos = s.find("{}")) s.replace(pos, 2, dir);
        return s;
    };
    for (const auto& [name, args] : commands) {
        std::array<std::string, 2> dirs = {T + "/run1_" + name, T + "/run2_" + name};
        for (const auto& d : dirs) {
            std::filesystem::create_directories(d);
            const int code = run(cli + " " + expand(args, d));
            if (code != 0) problems.push_back(name + " exited " + std::to_string(code));
        }
        // Reuse the reference outputs later in the list.
        if (name == "fit") std::filesystem::copy_file(dirs[0] + "/model.json", tmp / "ref" / "model.json");
        if (name == "calibrate") std::filesystem::copy_file(dirs[0] + "/bin.json", tmp / "ref" / "bin.json");
        std::size_t files = 0;
        for (const auto& e : std::filesystem::recursive_directory_iterator(dirs[0])) {
            if (!e.is_regular_file()) continue;
            ++files;
            const auto rel = std::filesystem::relative(e.path(), dirs[0]);
            if (slurp(e.path()) != slurp(std::filesystem::path(dirs[1]) / rel))
                problems.push_back(name + ": " + rel.string() + " differs");
        }
        if (files == 0) problems.push_back(name + " produced no output");
    }
    Outcome o;
    o.pass = problems.empty();
    o.detail = o.pass ? std::to_string(commands.size()) + " subcommand runs byte-identical on rerun" : problems.front();
    return o;
}

// ---- 9: SWAT-shaped ingestion ---------------------------------------------------------------

Outcome criterion9() {
    std::vector<std::string> problems;
    const auto map = auto_map_signals(swat_signal_names());
    SubsystemSet stages;
    for (const auto& [s, sigs] : map.assignments()) stages.insert(s);
    if (swat_signal_names().size() != 51) problems.push_back("fixture does not have 51 signals");
    if (stages != SubsystemSet{"P1", "P2", "P3", "P4", "P5", "P6"}) problems.push_back("stages are not P1..P6");

    const auto fx = fixtures::make_swat_fixture(9);
    const auto g = load_graph(CPSDIAG_SOURCE_DIR "/configs/swat/graph.json");
    const auto run = make_annotated_run(fx.attacked, attacks_from_json(fx.attacks), map, g);
    const auto preset = swat_preset();
    const auto model = fit_linear_subspace_model(fx.nominal.slice_rows(0, 2000), map, 32, 12);
    const auto bin = calibrate_thresholds(model, fx.nominal.slice_rows(2000, 2000), preset.binarization);
    const auto rows = evaluate_run(run, model, bin, g, preset.weights, preset.theta);
    const auto csv = evaluation_to_csv(rows);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    if (line != "attack,attacked_subsystems,symptoms,diagnosis_candidates") problems.push_back("header: " + line);
    std::size_t data = 0;
    while (std::getline(in, line)) {
        ++data;
        if (std::count(line.begin(), line.end(), ',') != 3) problems.push_back("row without 4 fields: " + line);
    }
    if (data != 2) problems.push_back("expected 2 attack rows");
    Outcome o;
    o.pass = problems.empty();
    std::string first_row = rows.empty() ? "" : rows[0].attack + " symptoms " + std::to_string(rows[0].symptoms.size());
    o.detail = o.pass ? "51 signals -> P1..P6, 4-column table with " + std::to_string(data) + " rows (" + first_row + ")"
                      : problems.front();
    return o;
}

}  // namespace

int main() {
    const std::vector<std::function<Outcome()>> criteria = {criterion1, criterion2, criterion3,
                                                            criterion4, criterion5, criterion6,
                                                            criterion7, criterion8, criterion9};
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i]();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << (i + 1) << ": " << o.detail << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
