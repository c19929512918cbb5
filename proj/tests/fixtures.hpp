#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <unistd.h>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpsdiag/causal_graph.hpp"
#include "cpsdiag/ingest.hpp"
#include "cpsdiag/telemetry.hpp"
#include "oracle.hpp"

namespace fixtures {

inline cpsdiag::CausalGraph to_graph(const oracle::Digraph& d) {
    std::vector<std::string> nodes;
    for (int i = 0; i < d.n; ++i) nodes.push_back("n" + std::to_string(i));
    std::vector<cpsdiag::CausalGraph::Edge> edges;
    for (int i = 0; i < d.n; ++i)
        for (int j = 0; j < d.n; ++j)
            if (d.adj[i][j]) edges.emplace_back(nodes[i], nodes[j]);
    return cpsdiag::CausalGraph(nodes, edges);
}

inline cpsdiag::CausalGraph chain_abc() { return cpsdiag::CausalGraph({"A", "B", "C"}, {{"A", "B"}, {"B", "C"}}); }

inline cpsdiag::HealthStateVector health(const cpsdiag::CausalGraph& g, const cpsdiag::SubsystemSet& symptoms) {
    cpsdiag::HealthStateVector h;
    for (const auto& n : g.nodes()) h.states[n] = symptoms.count(n) > 0;
    return h;
}

// Subsystem A: a, b (phase-shifted sinusoids); subsystem B: c (noisy AR(1)).
inline cpsdiag::TimeSeriesFrame make_frame(std::size_t rows, std::uint64_t seed, double noise = 0.05) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    cpsdiag::TimeSeriesFrame f;
    f.signal_names = {"a", "b", "c"};
    f.values.resize(static_cast<Eigen::Index>(rows), 3);
    double c = 0.0;
    for (std::size_t t = 0; t < rows; ++t) {
        f.timestamps.push_back(static_cast<std::int64_t>(t));
        const double w = 0.2 * static_cast<double>(t);
        c = 0.9 * c + 0.3 * normal(rng);
        f.values(static_cast<Eigen::Index>(t), 0) = 2.0 * std::sin(w) + 1.0 + noise * normal(rng);
        f.values(static_cast<Eigen::Index>(t), 1) = std::cos(w) - 3.0 + noise * normal(rng);
        f.values(static_cast<Eigen::Index>(t), 2) = c + noise * normal(rng);
    }
    return f;
}

inline const cpsdiag::SubsystemSignalsMap& small_map() {
    static const cpsdiag::SubsystemSignalsMap m({{"A", {"a", "b"}}, {"B", {"c"}}});
    return m;
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("cpsdiag_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

// Six-stage plant with the 51 testbed signal names. Each stage follows a
// two-dimensional latent AR(1) process driven by its upstream stage, and every
// signal is a fixed mix of its stage's latent state plus sensor noise.
struct SwatFixture {
    cpsdiag::TimeSeriesFrame nominal;
    cpsdiag::TimeSeriesFrame attacked;
    nlohmann::json attacks;
};

inline constexpr std::int64_t kSwatEpoch = 1451296800;  // 2015-12-28T10:00:00Z

inline cpsdiag::TimeSeriesFrame swat_frame(std::size_t rows, std::int64_t t0, std::mt19937_64& rng,
                                           const std::vector<std::pair<std::int64_t, std::int64_t>>& spoof_p3) {
    const auto& names = cpsdiag::swat_signal_names();
    const std::size_t m = names.size();
    std::normal_distribution<double> normal(0.0, 1.0);
    std::mt19937_64 loading_rng(7);  // loadings are a property of the plant
    std::vector<int> stage(m);
    std::vector<double> a(m), b(m);
    for (std::size_t j = 0; j < m; ++j) {
        const auto pos = names[j].find_first_of("0123456789");
        stage[j] = names[j][pos] - '1';
        a[j] = normal(loading_rng);
        b[j] = normal(loading_rng);
    }
    cpsdiag::TimeSeriesFrame f;
    f.signal_names = names;
    f.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(m));
    std::vector<double> z1(6, 0.0), z2(6, 0.0);
    for (std::size_t t = 0; t < rows; ++t) {
        const std::int64_t ts = t0 + static_cast<std::int64_t>(t);
        f.timestamps.push_back(ts);
        for (int s = 0; s < 6; ++s) {
            const double up = s > 0 ? z1[s - 1] : 0.0;
            z1[s] = 0.9 * z1[s] + 0.3 * up + 0.3 * normal(rng);
            z2[s] = 0.8 * z2[s] + 0.3 * normal(rng);
        }
        bool spoof = false;
        for (const auto& [lo, hi] : spoof_p3) spoof = spoof || (ts >= lo && ts < hi);
        for (std::size_t j = 0; j < m; ++j) {
            double v = a[j] * z1[stage[j]] + b[j] * z2[stage[j]] + 0.05 * normal(rng);
            if (spoof && stage[j] == 2) v += 4.0 * (j % 2 == 0 ? 1.0 : -1.0);
            f.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = v;
        }
    }
    return f;
}

inline SwatFixture make_swat_fixture(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    SwatFixture fx;
    fx.nominal = swat_frame(4000, kSwatEpoch, rng, {});
    const std::int64_t t0 = kSwatEpoch + 10000;
    fx.attacked = swat_frame(1500, t0, rng, {{t0 + 400, t0 + 700}});
    fx.attacks = nlohmann::json::array({
        {{"id", "A1"}, {"subsystems", {"P3"}}, {"start", "2015-12-28T12:53:20Z"}, {"end", t0 + 700}},
        {{"id", "A2"}, {"subsystems", {"P1"}}, {"start", t0 + 1000}, {"end", t0 + 1200}},
    });
    return fx;
}

}  // namespace fixtures
