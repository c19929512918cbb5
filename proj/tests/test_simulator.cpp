#include <doctest.h>

#include <cmath>
#include <deque>
#include <filesystem>
#include <set>

#include "cpsdiag/error.hpp"
#include "cpsdiag/simulator.hpp"
#include "cpsdiag/trial_io.hpp"
#include "fixtures.hpp"

using namespace cpsdiag;

namespace {

bool weakly_connected(const CausalGraph& g) {
    std::vector<char> seen(g.size(), 0);
    std::deque<CausalGraph::Index> q{0};
    seen[0] = 1;
    while (!q.empty()) {
        const auto v = q.front();
        q.pop_front();
        auto visit = [&](CausalGraph::Index w) {
            if (!seen[w]) {
                seen[w] = 1;
                q.push_back(w);
            }
        };
        for (auto w : g.successors(v)) visit(w);
        for (auto w : g.predecessors(v)) visit(w);
    }
    return std::count(seen.begin(), seen.end(), 1) == static_cast<long>(g.size());
}

bool acyclic(const CausalGraph& g) {
    std::vector<std::size_t> indeg(g.size(), 0);
    for (std::size_t v = 0; v < g.size(); ++v) indeg[v] = g.predecessors(v).size();
    std::deque<CausalGraph::Index> q;
    for (std::size_t v = 0; v < g.size(); ++v)
        if (indeg[v] == 0) q.push_back(v);
    std::size_t removed = 0;
    while (!q.empty()) {
        const auto v = q.front();
        q.pop_front();
        ++removed;
        for (auto w : g.successors(v))
            if (--indeg[w] == 0) q.push_back(w);
    }
    return removed == g.size();
}

LtiSystem scalar_system(double a) {
    LtiSystem s;
    s.A = Eigen::MatrixXd::Constant(1, 1, a);
    s.B = Eigen::MatrixXd::Zero(1, 1);
    s.blocks = {{"X", 0, 1}};
    return s;
}

TrialConfig small_trial() {
    TrialConfig c;
    c.min_nodes = 5;
    c.max_nodes = 8;
    c.train_rows = 400;
    c.validation_rows = 100;
    c.calibration_rows = 300;
    c.test_rows = 400;
    c.fault_offset = 100;
    c.fault_rows = 200;
    return c;
}

}  // namespace

TEST_CASE("derived seeds are stable and distinct") {
    CHECK(derive_seed(1, 2) == derive_seed(1, 2));
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(42, i));
    CHECK(seen.size() == 1000);
    CHECK(derive_seed(0, 0) != derive_seed(1, 0));
}

TEST_CASE("property: sampled graphs have the requested size and shape") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const std::size_t n = 2 + seed % 40;
        const double density = std::max(1.0 / static_cast<double>(n), 0.02 + 0.003 * static_cast<double>(seed % 50));
        const bool cycles = seed % 3 == 0;
        const auto g = sample_graph(n, density, cycles, seed);
        CHECK(g.size() == n);
        CHECK(g.edge_count() == static_cast<std::size_t>(std::ceil(density * static_cast<double>(n * (n - 1)) - 1e-9)));
        CHECK(weakly_connected(g));
        if (!cycles) CHECK(acyclic(g));
        for (const auto& [a, b] : g.edges()) CHECK(a != b);
        CHECK(g.edges() == sample_graph(n, density, cycles, seed).edges());
    }
    CHECK(sample_graph(4, 1.0, true, 1).edge_count() == 12);
    CHECK(sample_graph(4, 1.0, false, 1).edge_count() == 6);  // a DAG holds at most n(n-1)/2
}

TEST_CASE("graph sampling errors") {
    CHECK_THROWS_AS(sample_graph(1, 0.5, false, 0), ValidationError);
    CHECK_THROWS_WITH_AS(sample_graph(20, 0.01, false, 0), doctest::Contains("density >= 0.05"), ValidationError);
    CHECK_THROWS_AS(sample_graph(5, 0.0, false, 0), ValidationError);
}

TEST_CASE("property: system matrix follows the graph's block pattern") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const auto g = sample_graph(3 + seed % 10, 0.3, seed % 2 == 0, seed);
        SystemConfig cfg;
        cfg.damping = 0.5 + 0.1 * static_cast<double>(seed % 5);
        cfg.inputs = seed % 2 ? InputPolicy::sources : InputPolicy::all_nodes;
        const auto sys = build_system(g, cfg, seed);
        std::size_t expected_first = 0;
        for (const auto& b : sys.blocks) {
            CHECK(b.first == expected_first);
            CHECK(b.count >= cfg.min_signals);
            CHECK(b.count <= cfg.max_signals);
            expected_first += b.count;
        }
        CHECK(sys.state_dim() == expected_first);
        for (std::size_t r = 0; r < g.size(); ++r)
            for (std::size_t c = 0; c < g.size(); ++c) {
                if (r == c) continue;
                const auto& rb = sys.blocks[r];
                const auto& cb = sys.blocks[c];
                const bool nonzero =
                    sys.A.block(rb.first, cb.first, rb.count, cb.count).cwiseAbs().maxCoeff() > 0.0;
                const bool edge = std::count(g.successors(c).begin(), g.successors(c).end(), r) > 0;
                CHECK(nonzero == edge);
            }
        CHECK(spectral_abscissa(sys.A) == doctest::Approx(-cfg.damping).epsilon(1e-8));
        for (std::size_t i = 0; i < g.size(); ++i) {
            const auto col = sys.B.col(static_cast<Eigen::Index>(i));
            const auto& b = sys.blocks[i];
            CHECK(col.cwiseAbs().sum() ==
                  doctest::Approx(col.segment(b.first, b.count).cwiseAbs().sum()));
            if (cfg.inputs == InputPolicy::sources && !g.predecessors(i).empty()) CHECK(col.isZero());
        }
    }
}

TEST_CASE("RK4 reproduces exponential decay with fourth-order error") {
    const auto sys = scalar_system(-1.0);
    auto error_at = [&](double dt) {
        SimulationOptions o;
        o.dt = dt;
        o.horizon = static_cast<std::size_t>(std::lround(1.0 / dt)) + 1;
        o.initial_state = Eigen::VectorXd::Constant(1, 1.0);
        const auto f = simulate(sys, o, 0);
        return std::abs(f.values(f.values.rows() - 1, 0) - std::exp(-1.0));
    };
    const double coarse = error_at(0.1);
    const double fine = error_at(0.05);
    CHECK(coarse < 1e-6);
    CHECK(coarse / fine == doctest::Approx(16.0).epsilon(0.05));
}

TEST_CASE("faults act only on the target block and only inside their interval") {
    const auto g = fixtures::chain_abc();
    SystemConfig cfg;
    cfg.noise_std = 0.01;
    const auto sys = build_system(g, cfg, 3);
    FaultSpec f{"B", 4.0, FaultEntries::off_diagonal, 100, 150};
    const auto a = faulted_matrix(sys, f);
    const auto& b = sys.block("B");
    for (Eigen::Index r = 0; r < a.rows(); ++r)
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
            const bool inside = r >= static_cast<Eigen::Index>(b.first) && r < static_cast<Eigen::Index>(b.first + b.count) &&
                                c >= static_cast<Eigen::Index>(b.first) && c < static_cast<Eigen::Index>(b.first + b.count);
            const double want = inside && r != c ? 4.0 * sys.A(r, c) : sys.A(r, c);
            CHECK(a(r, c) == want);
        }

    SimulationOptions o;
    o.horizon = 300;
    o.dt = 0.02;
    o.burn_in = 50;
    const auto clean = simulate(sys, o, 9);
    o.fault = f;
    const auto faulty = simulate(sys, o, 9);
    CHECK(clean.values.topRows(101) == faulty.values.topRows(101));
    CHECK(clean.values.row(101) != faulty.values.row(101));

    o.fault->scale = 1.0;
    CHECK(simulate(sys, o, 9).values == clean.values);
}

TEST_CASE("fault specs validate and round-trip") {
    CHECK_THROWS_AS((FaultSpec{"", 2.0, FaultEntries::diagonal, 0, 1}).validate(), ValidationError);
    CHECK_THROWS_AS((FaultSpec{"A", 0.0, FaultEntries::diagonal, 0, 1}).validate(), ValidationError);
    CHECK_THROWS_AS((FaultSpec{"A", 2.0, FaultEntries::diagonal, 5, 5}).validate(), ValidationError);
    const FaultSpec f{"S003", 7.5, FaultEntries::off_diagonal, 10, 20};
    const auto back = fault_from_json(fault_to_json(f));
    CHECK(back.target == f.target);
    CHECK(back.scale == f.scale);
    CHECK(back.entries == f.entries);
    CHECK(back.start_time == 10);
    CHECK(back.end_time == 20);
    CHECK_THROWS_AS(fault_entries_from_string("some"), ValidationError);
}

TEST_CASE("trials are deterministic and well-formed") {
    const auto cfg = small_trial();
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto d = make_trial(cfg, seed);
        const auto again = make_trial(cfg, seed);
        CHECK(d.test.values == again.test.values);
        CHECK(d.manifest == again.manifest);
        CHECK(d.graph.size() >= 5);
        CHECK(d.graph.size() <= 8);
        CHECK(acyclic(d.graph));
        CHECK_FALSE(d.graph.successors(d.graph.index_of(d.fault.target)).empty());
        CHECK(d.fault.scale >= cfg.min_scale);
        CHECK(d.fault.scale <= cfg.max_scale);
        CHECK(d.train.rows() == 400);
        CHECK(d.validation.timestamps.front() == d.train.timestamps.back() + 1);
        CHECK(d.calibration.timestamps.front() == d.validation.timestamps.back() + 1);
        CHECK(d.test.timestamps.front() == d.calibration.timestamps.back() + 1);
        CHECK(d.fault.start_time == d.test.timestamps.front() + 100);
        CHECK(d.fault.end_time <= d.test.timestamps.back() + 1);
        CHECK(d.map.signal_order() == d.test.signal_names);
        CHECK(d.manifest["faulted_spectral_abscissa"].get<double>() < 0.0);
        for (const char* key : {"nodes", "edges", "noise_std", "dt", "graph_seed", "segments", "fault", "config"})
            CHECK(d.manifest.contains(key));
    }
    CHECK(make_trial(cfg, 1).test.values != make_trial(cfg, 2).test.values);
}

TEST_CASE("trial directories round-trip") {
    const auto d = make_trial(small_trial(), 4);
    fixtures::TempDir dir("trial");
    write_trial(dir.path, d);
    CHECK(trial_files().size() == 8);
    for (const auto& f : trial_files()) CHECK(std::filesystem::exists(dir / f));
    const auto back = read_trial(dir.path);
    CHECK(back.graph.edges() == d.graph.edges());
    CHECK(back.map == d.map);
    CHECK(back.train.values == d.train.values);
    CHECK(back.test.timestamps == d.test.timestamps);
    CHECK(back.test.values == d.test.values);
    CHECK(back.fault.target == d.fault.target);
    CHECK(back.fault.scale == d.fault.scale);
    CHECK(back.seed == d.seed);
    std::filesystem::remove(dir / trial_files().back());
    CHECK_THROWS_AS(read_trial(dir.path), ValidationError);
}
