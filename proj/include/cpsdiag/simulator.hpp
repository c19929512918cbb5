#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cpsdiag/causal_graph.hpp"
#include "cpsdiag/telemetry.hpp"

namespace cpsdiag {

// Independent 64-bit seed for item `index` of a seeded family (SplitMix64).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

// Nodes are named S000, S001, ... Edges: a random spanning tree (for
// weak connectivity) filled up to ceil(density * n * (n-1)) with pairs drawn
// without replacement. Acyclic graphs orient every edge along a random order.
CausalGraph sample_graph(std::size_t n_nodes, double edge_density, bool allow_cycles,
                         std::uint64_t seed);

enum class InputPolicy {
    all_nodes,  // every subsystem receives its own control input
    sources,    // only subsystems without predecessors (all nodes if there are none)
};

struct SystemConfig {
    std::size_t min_signals = 2;
    std::size_t max_signals = 5;
    double coupling_scale = 1.0;  // entries of permitted blocks ~ U[-c, c]
    double edge_gain = 1.0;       // extra factor on blocks that follow graph edges
    double damping = 1.0;
    double input_gain = 5.0;      // entries of B ~ U[-g, g] on the input's own block
    InputPolicy inputs = InputPolicy::all_nodes;
    double noise_std = 0.0;

    void validate() const;
};

struct StateBlock {
    SubsystemId id;
    std::size_t first = 0;
    std::size_t count = 0;
};

// dy/dt = A y + B u, with one contiguous state block per subsystem. An edge
// (l, m) permits block (row m, column l) of A to be nonzero.
struct LtiSystem {
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;  // one column per subsystem; inactive inputs are zero columns
    std::vector<StateBlock> blocks;  // graph node order
    double noise_std = 0.0;
    double damping = 0.0;
    double raw_abscissa = 0.0;  // spectral abscissa before the stabilizing shift

    std::size_t state_dim() const { return static_cast<std::size_t>(A.rows()); }
    const StateBlock& block(std::string_view id) const;
    // Signal names "<subsystem>_x<i>", in state order.
    std::vector<std::string> signal_names() const;
    SubsystemSignalsMap signals_map() const;
};

// Largest real part over the eigenvalues of m.
double spectral_abscissa(const Eigen::MatrixXd& m);

LtiSystem build_system(const CausalGraph& g, const SystemConfig& cfg, std::uint64_t seed);

enum class FaultEntries { all_nonzero, off_diagonal, diagonal };

std::string to_string(FaultEntries e);
FaultEntries fault_entries_from_string(std::string_view s);

// Multiplies selected entries of the target's diagonal block of A by `scale`
// while start_time <= t < end_time.
struct FaultSpec {
    SubsystemId target;
    double scale = 1.0;
    FaultEntries entries = FaultEntries::all_nonzero;
    std::int64_t start_time = 0;
    std::int64_t end_time = 0;

    void validate() const;
};

Eigen::MatrixXd faulted_matrix(const LtiSystem& sys, const FaultSpec& fault);

struct ControlSpec {
    std::size_t hold = 20;  // steps between resampled levels
    double level_std = 1.0;
};

struct SimulationOptions {
    std::size_t horizon = 0;  // emitted rows
    double dt = 0.01;
    ControlSpec control;
    std::optional<FaultSpec> fault;
    std::size_t burn_in = 0;  // steps integrated before the first emitted row
    std::int64_t first_timestamp = 0;
    std::optional<Eigen::VectorXd> initial_state;  // zero when absent
};

// Fixed-step RK4. Row i holds the noisy state at time index first_timestamp + i,
// row 0 being the state after burn-in. The fault uses the time index of the
// step's starting row.
TimeSeriesFrame simulate(const LtiSystem& sys, const SimulationOptions& opts, std::uint64_t seed);

struct TrialConfig {
    std::size_t min_nodes = 5;
    std::size_t max_nodes = 50;
    double min_density = 0.04;
    double max_density = 0.12;
    bool allow_cycles = false;
    double min_scale = 3.0;
    double max_scale = 10.0;
    double min_noise = 0.01;
    double max_noise = 0.02;
    FaultEntries fault_entries = FaultEntries::off_diagonal;
    // When false, fault targets are drawn only from nodes with a successor.
    bool fault_on_sinks = false;
    SystemConfig system;
    ControlSpec control;
    double max_dt = 0.05;
    std::size_t burn_in = 400;
    std::size_t train_rows = 3000;
    std::size_t validation_rows = 1200;
    std::size_t calibration_rows = 8192;  // 256 windows of 32 for a stable p99
    std::size_t test_rows = 1500;
    std::size_t fault_offset = 500;  // fault starts this many rows into the test segment
    std::size_t fault_rows = 800;
    // Fault draws are repeated until the faulted plant has spectral abscissa
    // below -stability_margin.
    std::size_t max_fault_attempts = 50;
    double stability_margin = 1e-3;

    TrialConfig();
    void validate() const;
};

struct TrialDataset {
    CausalGraph graph;
    SubsystemSignalsMap map;
    TimeSeriesFrame train, validation, calibration, test;
    FaultSpec fault;
    std::uint64_t seed = 0;
    nlohmann::json manifest;  // every sampled parameter
};

TrialDataset make_trial(const TrialConfig& cfg, std::uint64_t seed);

nlohmann::json trial_config_to_json(const TrialConfig& cfg);
nlohmann::json fault_to_json(const FaultSpec& f);
FaultSpec fault_from_json(const nlohmann::json& j);

}  // namespace cpsdiag
