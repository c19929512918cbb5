#include "cpsdiag/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

#include <Eigen/Eigenvalues>

#include "cpsdiag/error.hpp"
#include "cpsdiag/graph_io.hpp"

namespace cpsdiag {

using nlohmann::json;

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

std::string node_name(std::size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "S%03zu", i);
    return buf;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

}  // namespace

CausalGraph sample_graph(std::size_t n_nodes, double edge_density, bool allow_cycles, std::uint64_t seed) {
    if (n_nodes < 2 || n_nodes > 200) throw ValidationError("node count must lie in [2, 200]");
    if (!(edge_density > 0.0 && edge_density <= 1.0)) throw ValidationError("edge density must lie in (0, 1]");
    const double pairs = static_cast<double>(n_nodes * (n_nodes - 1));
    auto wanted = static_cast<std::size_t>(std::ceil(edge_density * pairs - 1e-9));
    if (wanted < n_nodes - 1) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "edge density %.6g gives %zu edges, a connected graph on %zu nodes needs %zu "
                      "(density >= %.6g)",
                      edge_density, wanted, n_nodes, n_nodes - 1, 1.0 / static_cast<double>(n_nodes));
        throw ValidationError(buf);
    }

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> order(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::size_t> pos(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) pos[order[i]] = i;

    std::set<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 1; i < n_nodes; ++i) {
        const std::size_t a = order[uniform_index(rng, 0, i - 1)];
        const std::size_t b = order[i];
        if (allow_cycles && uniform(rng, 0.0, 1.0) < 0.5)
            edges.emplace(b, a);
        else
            edges.emplace(a, b);
    }

    std::vector<std::pair<std::size_t, std::size_t>> pool;
    for (std::size_t a = 0; a < n_nodes; ++a)
        for (std::size_t b = 0; b < n_nodes; ++b)
            if (a != b && (allow_cycles || pos[a] < pos[b]) && !edges.count({a, b})) pool.emplace_back(a, b);
    std::shuffle(pool.begin(), pool.end(), rng);
    wanted = std::min(wanted, edges.size() + pool.size());
    for (std::size_t i = 0; edges.size() < wanted; ++i) edges.insert(pool[i]);

    std::vector<SubsystemId> names;
    for (std::size_t i = 0; i < n_nodes; ++i) names.push_back(node_name(i));
    std::vector<CausalGraph::Edge> named;
    for (const auto& [a, b] : edges) named.emplace_back(names[a], names[b]);
    return CausalGraph(std::move(names), named);
}

void SystemConfig::validate() const {
    if (min_signals < 1 || min_signals > max_signals) throw ValidationError("invalid signals-per-node range");
    if (!(coupling_scale > 0.0)) throw ValidationError("coupling scale must be positive");
    if (!(edge_gain > 0.0)) throw ValidationError("edge gain must be positive");
    if (!(damping > 0.0)) throw ValidationError("damping must be positive");
    if (!(input_gain >= 0.0)) throw ValidationError("input gain must be non-negative");
    if (!(noise_std >= 0.0)) throw ValidationError("noise std must be non-negative");
}

const StateBlock& LtiSystem::block(std::string_view id) const {
    for (const auto& b : blocks)
        if (b.id == id) return b;
    throw ValidationError("unknown subsystem '" + std::string(id) + "'");
}

std::vector<std::string> LtiSystem::signal_names() const {
    std::vector<std::string> out;
    for (const auto& b : blocks)
        for (std::size_t i = 0; i < b.count; ++i) out.push_back(b.id + "_x" + std::to_string(i));
    return out;
}

SubsystemSignalsMap LtiSystem::signals_map() const {
    SubsystemSignalsMap::Assignments a;
    for (const auto& b : blocks)
        for (std::size_t i = 0; i < b.count; ++i) a[b.id].push_back(b.id + "_x" + std::to_string(i));
    return SubsystemSignalsMap(std::move(a));
}

double spectral_abscissa(const Eigen::MatrixXd& m) {
    if (m.rows() == 0) return 0.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
    if (es.info() != Eigen::Success) throw NumericalError("eigenvalue computation did not converge");
    return es.eigenvalues().real().maxCoeff();
}

LtiSystem build_system(const CausalGraph& g, const SystemConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    if (g.size() == 0) throw ValidationError("graph has no nodes");
    std::mt19937_64 rng(seed);
    LtiSystem sys;
    std::size_t dim = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const std::size_t count = uniform_index(rng, cfg.min_signals, cfg.max_signals);
        sys.blocks.push_back({g.name(i), dim, count});
        dim += count;
    }
    const auto n = static_cast<Eigen::Index>(dim);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    auto fill = [&](const StateBlock& rows, const StateBlock& cols, double scale) {
        for (std::size_t c = 0; c < cols.count; ++c)
            for (std::size_t r = 0; r < rows.count; ++r)
                m(static_cast<Eigen::Index>(rows.first + r), static_cast<Eigen::Index>(cols.first + c)) =
                    uniform(rng, -scale, scale);
    };
    for (const auto& b : sys.blocks) fill(b, b, cfg.coupling_scale);
    for (const auto& [from, to] : g.edges())
        fill(sys.blocks[to], sys.blocks[from], cfg.coupling_scale * cfg.edge_gain);

    sys.raw_abscissa = spectral_abscissa(m);
    sys.A = m - (cfg.damping + sys.raw_abscissa) * Eigen::MatrixXd::Identity(n, n);

    std::vector<char> driven(g.size(), 1);
    if (cfg.inputs == InputPolicy::sources) {
        bool any = false;
        for (std::size_t i = 0; i < g.size(); ++i) {
            driven[i] = g.predecessors(i).empty();
            any = any || driven[i];
        }
        if (!any) std::fill(driven.begin(), driven.end(), 1);
    }
    sys.B = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(g.size()));
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!driven[i]) continue;
        const auto& b = sys.blocks[i];
        for (std::size_t r = 0; r < b.count; ++r)
            sys.B(static_cast<Eigen::Index>(b.first + r), static_cast<Eigen::Index>(i)) =
                uniform(rng, -cfg.input_gain, cfg.input_gain);
    }
    sys.noise_std = cfg.noise_std;
    sys.damping = cfg.damping;
    return sys;
}

std::string to_string(FaultEntries e) {
    switch (e) {
        case FaultEntries::all_nonzero: return "all_nonzero";
        case FaultEntries::off_diagonal: return "off_diagonal";
        case FaultEntries::diagonal: return "diagonal";
    }
    return "all_nonzero";
}

FaultEntries fault_entries_from_string(std::string_view s) {
    if (s == "all_nonzero") return FaultEntries::all_nonzero;
    if (s == "off_diagonal") return FaultEntries::off_diagonal;
    if (s == "diagonal") return FaultEntries::diagonal;
    throw ValidationError("unknown fault entry rule '" + std::string(s) +
                          "' (expected all_nonzero, off_diagonal or diagonal)");
}

void FaultSpec::validate() const {
    if (target.empty()) throw ValidationError("fault target is empty");
    if (!(scale > 0.0) || !std::isfinite(scale)) throw ValidationError("fault scale must be positive");
    if (start_time >= end_time) throw ValidationError("fault start must precede its end");
}

Eigen::MatrixXd faulted_matrix(const LtiSystem& sys, const FaultSpec& fault) {
    const auto& b = sys.block(fault.target);
    Eigen::MatrixXd a = sys.A;
    for (std::size_t r = 0; r < b.count; ++r)
        for (std::size_t c = 0; c < b.count; ++c) {
            const bool diag = r == c;
            if ((fault.entries == FaultEntries::off_diagonal && diag) ||
                (fault.entries == FaultEntries::diagonal && !diag))
                continue;
            a(static_cast<Eigen::Index>(b.first + r), static_cast<Eigen::Index>(b.first + c)) *= fault.scale;
        }
    return a;
}

TimeSeriesFrame simulate(const LtiSystem& sys, const SimulationOptions& opts, std::uint64_t seed) {
    if (opts.horizon == 0) throw ValidationError("horizon must be positive");
    if (!(opts.dt > 0.0) || !std::isfinite(opts.dt)) throw ValidationError("dt must be positive");
    if (opts.control.hold == 0) throw ValidationError("control hold must be positive");
    if (opts.fault) opts.fault->validate();
    const auto n = static_cast<Eigen::Index>(sys.state_dim());
    const Eigen::MatrixXd a_fault = opts.fault ? faulted_matrix(sys, *opts.fault) : Eigen::MatrixXd();

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> level(0.0, opts.control.level_std);
    std::normal_distribution<double> noise(0.0, 1.0);
    Eigen::VectorXd y = opts.initial_state ? *opts.initial_state : Eigen::VectorXd::Zero(n);
    if (y.size() != n) throw ValidationError("initial state has the wrong dimension");
    Eigen::VectorXd u(sys.B.cols());

    const double dt = opts.dt;
    std::size_t step = 0;
    auto advance = [&](std::int64_t t) {
        if (step % opts.control.hold == 0)
            for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = level(rng);
        ++step;
        const bool faulty = opts.fault && t >= opts.fault->start_time && t < opts.fault->end_time;
        const Eigen::MatrixXd& a = faulty ? a_fault : sys.A;
        const Eigen::VectorXd bu = sys.B * u;
        const Eigen::VectorXd k1 = a * y + bu;
        const Eigen::VectorXd k2 = a * (y + 0.5 * dt * k1) + bu;
        const Eigen::VectorXd k3 = a * (y + 0.5 * dt * k2) + bu;
        const Eigen::VectorXd k4 = a * (y + dt * k3) + bu;
        y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!y.allFinite()) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "integration diverged at time index %lld; reduce dt (currently %g)",
                          static_cast<long long>(t), dt);
            throw NumericalError(buf);
        }
    };

    const std::int64_t t0 = opts.first_timestamp;
    for (std::size_t i = 0; i < opts.burn_in; ++i)
        advance(t0 - static_cast<std::int64_t>(opts.burn_in - i));

    TimeSeriesFrame f;
    f.signal_names = sys.signal_names();
    f.timestamps.resize(opts.horizon);
    f.values.resize(static_cast<Eigen::Index>(opts.horizon), n);
    for (std::size_t i = 0; i < opts.horizon; ++i) {
        const std::int64_t t = t0 + static_cast<std::int64_t>(i);
        f.timestamps[i] = t;
        for (Eigen::Index j = 0; j < n; ++j)
            f.values(static_cast<Eigen::Index>(i), j) = y(j) + sys.noise_std * noise(rng);
        if (i + 1 < opts.horizon) advance(t);
    }
    return f;
}

TrialConfig::TrialConfig() {
    system.min_signals = 3;
    system.edge_gain = 2.0;
    system.inputs = InputPolicy::sources;
}

void TrialConfig::validate() const {
    if (min_nodes < 2 || max_nodes > 200 || min_nodes > max_nodes)
        throw ValidationError("node range must satisfy 2 <= min <= max <= 200");
    if (!(min_density > 0.0 && min_density <= max_density && max_density <= 1.0))
        throw ValidationError("density range must satisfy 0 < min <= max <= 1");
    if (!(min_scale > 0.0 && min_scale <= max_scale)) throw ValidationError("invalid fault scale range");
    if (!(min_noise >= 0.0 && min_noise <= max_noise)) throw ValidationError("invalid noise range");
    if (!(max_dt > 0.0)) throw ValidationError("max dt must be positive");
    if (train_rows == 0 || validation_rows == 0 || calibration_rows == 0 || test_rows == 0)
        throw ValidationError("every segment needs at least one row");
    if (fault_rows == 0 || fault_offset + fault_rows > test_rows)
        throw ValidationError("fault interval must lie inside the test segment");
    if (max_fault_attempts == 0) throw ValidationError("max fault attempts must be positive");
    system.validate();
}

TrialDataset make_trial(const TrialConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    std::mt19937_64 rng(seed);
    const std::size_t nodes = uniform_index(rng, cfg.min_nodes, cfg.max_nodes);
    // Densities below 1/n cannot connect the graph; the minimum is raised.
    const double density = std::max(uniform(rng, cfg.min_density, cfg.max_density), 1.0 / static_cast<double>(nodes));
    const double noise_std = uniform(rng, cfg.min_noise, cfg.max_noise);
    const std::uint64_t graph_seed = rng();
    const std::uint64_t system_seed = rng();
    const std::uint64_t sim_seed = rng();

    TrialDataset d;
    d.seed = seed;
    d.graph = sample_graph(nodes, density, cfg.allow_cycles, graph_seed);
    SystemConfig sc = cfg.system;
    sc.noise_std = noise_std;
    const LtiSystem sys = build_system(d.graph, sc, system_seed);
    d.map = sys.signals_map();

    const auto nominal_rows = cfg.train_rows + cfg.validation_rows + cfg.calibration_rows;
    const auto test_start = static_cast<std::int64_t>(nominal_rows);
    FaultSpec fault;
    fault.entries = cfg.fault_entries;
    fault.start_time = test_start + static_cast<std::int64_t>(cfg.fault_offset);
    fault.end_time = fault.start_time + static_cast<std::int64_t>(cfg.fault_rows);
    std::vector<CausalGraph::Index> targets;
    for (CausalGraph::Index v = 0; v < nodes; ++v)
        if (cfg.fault_on_sinks || !d.graph.successors(v).empty()) targets.push_back(v);
    if (targets.empty()) throw ValidationError("graph has no node with a successor to fault");
    std::size_t attempts = 0;
    double faulted_abscissa = 0.0;
    Eigen::MatrixXd a_fault;
    for (;;) {
        ++attempts;
        fault.target = d.graph.name(targets[uniform_index(rng, 0, targets.size() - 1)]);
        fault.scale = uniform(rng, cfg.min_scale, cfg.max_scale);
        a_fault = faulted_matrix(sys, fault);
        faulted_abscissa = spectral_abscissa(a_fault);
        if (faulted_abscissa < -cfg.stability_margin) break;
        if (attempts == cfg.max_fault_attempts)
            throw NumericalError("no stable fault found in " + std::to_string(attempts) + " attempts");
    }
    d.fault = fault;

    const double norm = std::max(sys.A.cwiseAbs().rowwise().sum().maxCoeff(),
                                 a_fault.cwiseAbs().rowwise().sum().maxCoeff());
    const double dt = std::min(cfg.max_dt, 0.4 / norm);

    SimulationOptions opts;
    opts.horizon = nominal_rows + cfg.test_rows;
    opts.dt = dt;
    opts.control = cfg.control;
    opts.fault = fault;
    opts.burn_in = cfg.burn_in;
    const TimeSeriesFrame all = simulate(sys, opts, sim_seed);
    d.train = all.slice_rows(0, cfg.train_rows);
    d.validation = all.slice_rows(cfg.train_rows, cfg.validation_rows);
    d.calibration = all.slice_rows(cfg.train_rows + cfg.validation_rows, cfg.calibration_rows);
    d.test = all.slice_rows(nominal_rows, cfg.test_rows);

    json signals = json::object();
    for (const auto& b : sys.blocks) signals[b.id] = b.count;
    d.manifest = {
        {"seed", seed},
        {"config", trial_config_to_json(cfg)},
        {"nodes", nodes},
        {"edge_density", density},
        {"edges", d.graph.edge_count()},
        {"signals_per_node", signals},
        {"state_dim", sys.state_dim()},
        {"noise_std", noise_std},
        {"raw_spectral_abscissa", sys.raw_abscissa},
        {"faulted_spectral_abscissa", faulted_abscissa},
        {"fault_attempts", attempts},
        {"dt", dt},
        {"graph_seed", graph_seed},
        {"system_seed", system_seed},
        {"simulation_seed", sim_seed},
        {"segments",
         {{"train", {0, cfg.train_rows}},
          {"validation", {cfg.train_rows, cfg.train_rows + cfg.validation_rows}},
          {"calibration", {cfg.train_rows + cfg.validation_rows, nominal_rows}},
          {"test", {nominal_rows, nominal_rows + cfg.test_rows}}}},
        {"fault", fault_to_json(fault)},
    };
    return d;
}

json trial_config_to_json(const TrialConfig& cfg) {
    return {
        {"nodes", {cfg.min_nodes, cfg.max_nodes}},
        {"edge_density", {cfg.min_density, cfg.max_density}},
        {"allow_cycles", cfg.allow_cycles},
        {"fault_scale", {cfg.min_scale, cfg.max_scale}},
        {"noise_std", {cfg.min_noise, cfg.max_noise}},
        {"fault_entries", to_string(cfg.fault_entries)},
        {"fault_on_sinks", cfg.fault_on_sinks},
        {"signals_per_node", {cfg.system.min_signals, cfg.system.max_signals}},
        {"coupling_scale", cfg.system.coupling_scale},
        {"edge_gain", cfg.system.edge_gain},
        {"damping", cfg.system.damping},
        {"input_gain", cfg.system.input_gain},
        {"inputs", cfg.system.inputs == InputPolicy::sources ? "sources" : "all_nodes"},
        {"control_hold", cfg.control.hold},
        {"control_level_std", cfg.control.level_std},
        {"max_dt", cfg.max_dt},
        {"burn_in", cfg.burn_in},
        {"rows",
         {{"train", cfg.train_rows},
          {"validation", cfg.validation_rows},
          {"calibration", cfg.calibration_rows},
          {"test", cfg.test_rows}}},
        {"fault_offset", cfg.fault_offset},
        {"fault_rows", cfg.fault_rows},
        {"max_fault_attempts", cfg.max_fault_attempts},
        {"stability_margin", cfg.stability_margin},
    };
}

json fault_to_json(const FaultSpec& f) {
    return {{"target", f.target},
            {"scale", f.scale},
            {"entries", to_string(f.entries)},
            {"interval", {f.start_time, f.end_time}}};
}

FaultSpec fault_from_json(const json& j) {
    try {
        FaultSpec f;
        f.target = j.at("target").get<std::string>();
        f.scale = j.at("scale").get<double>();
        f.entries = fault_entries_from_string(j.value("entries", std::string("all_nonzero")));
        const auto& iv = j.at("interval");
        if (!iv.is_array() || iv.size() != 2) throw ValidationError("fault: 'interval' must be [start, end]");
        f.start_time = iv[0].get<std::int64_t>();
        f.end_time = iv[1].get<std::int64_t>();
        f.validate();
        return f;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("fault: ") + e.what());
    }
}

}  // namespace cpsdiag
