#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cpsdiag/binarization.hpp"
#include "cpsdiag/diagnosis.hpp"
#include "cpsdiag/simulator.hpp"

namespace cpsdiag {

struct Scenario {
    std::string name;
    std::string description;
    CausalGraph graph;
    HealthStateVector health;
};

// acyclic_single, acyclic_multi, cyclic_single, cyclic_multi.
const std::vector<Scenario>& canonical_scenarios();
const Scenario& canonical_scenario(std::string_view name);

DiagnosisResult run_scenario(const CausalGraph& g, const HealthStateVector& h,
                             const CriterionWeights& w, double theta,
                             const DiagnosisOptions& opts = {});

struct SweepRow {
    double theta = 0.0;
    SubsystemSet root_causes;
    SubsystemSet newly_added;  // relative to the previous emitted row
};

struct SweepResult {
    std::vector<SweepRow> rows;
    // Rows whose set does not contain the previous row's set.
    std::vector<std::string> warnings;
};

// 1.0, 0.9, ..., 0.0
std::vector<double> default_thetas();

// Emits a row only when the root-cause set changes. Thetas must be strictly
// descending.
SweepResult theta_sweep(const CausalGraph& g, const HealthStateVector& h, const CriterionWeights& w,
                        std::span<const double> thetas, const DiagnosisOptions& opts = {});

// Columns: theta, root_causes, newly_added. Sets are ';'-joined.
std::string sweep_to_csv(const SweepResult& s);
nlohmann::json sweep_to_json(const SweepResult& s);

nlohmann::json run_experiment1(const CriterionWeights& w, std::span<const double> thetas,
                               const DiagnosisOptions& opts = {});

enum class OutcomeCategory { missed_symptom, missed_cause, no_reduction, reduced_set, perfect };

std::string to_string(OutcomeCategory c);
const std::vector<OutcomeCategory>& all_categories();

struct TrialOutcome {
    OutcomeCategory category = OutcomeCategory::missed_symptom;
    SubsystemId s_true;
    SubsystemSet s_sym;
    SubsystemSet s_causal;
};

OutcomeCategory classify(const SubsystemId& s_true, const SubsystemSet& s_sym, const SubsystemSet& s_causal);

// Subsystems flagged in more than half of the given windows.
SubsystemSet majority_symptoms(std::span<const HealthStateVector> windows);

// Majority symptoms over windows whose end time lies in [start, end).
SubsystemSet incident_symptoms(std::span<const HealthStateVector> windows, std::int64_t start,
                               std::int64_t end);

struct Experiment2Config {
    std::size_t n_trials = 100;
    TrialConfig trial;
    double theta = 0.9;
    CriterionWeights weights;
    std::size_t window_len = 32;
    std::size_t latent_dim = 12;
    double percentile = 75.0;
    std::uint64_t seed = 0;
    Execution execution = Execution::parallel;

    void validate() const;
};

struct TrialRecord {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    bool completed = false;
    std::string error;
    TrialOutcome outcome;
    std::size_t nodes = 0;
    std::size_t edges = 0;
    double fault_scale = 0.0;
};

struct Experiment2Report {
    Experiment2Config config;
    std::vector<TrialRecord> trials;  // by index
    std::map<OutcomeCategory, std::size_t> counts;
    std::size_t completed = 0;
    double inclusion_rate = 0.0;  // s_true in S_causal, over completed trials
    double reduction_rate = 0.0;  // inclusion and |S_causal| < |S_sym|

    std::string summary() const;
};

TrialRecord run_trial(const Experiment2Config& cfg, std::size_t index);
// Trials run in parallel when cfg.execution is parallel; the report is the
// same either way.
Experiment2Report run_experiment2(const Experiment2Config& cfg);
nlohmann::json experiment2_to_json(const Experiment2Report& r);

// Detection-only study on simulated trials.
struct DetectionRecord {
    std::size_t index = 0;
    bool completed = false;
    std::string error;
    SubsystemId target;
    bool target_flagged = false;   // majority over fault windows
    std::size_t nominal_windows = 0;
    std::size_t nominal_flags = 0;  // subsystem-window flags on held-out nominal data
    std::size_t subsystems = 0;
};

struct DetectionConfig {
    std::size_t n_trials = 50;
    TrialConfig trial;
    std::size_t window_len = 32;
    std::size_t latent_dim = 12;
    double fault_percentile = 75.0;    // thresholds for the fault-window vote
    double nominal_percentile = 99.0;  // thresholds for the false-flag rate
    std::uint64_t seed = 0;
    Execution execution = Execution::parallel;
};

struct DetectionReport {
    std::vector<DetectionRecord> trials;
    std::size_t completed = 0;
    double detection_rate = 0.0;
    double false_flag_rate = 0.0;
};

DetectionReport run_detection_study(const DetectionConfig& cfg);

}  // namespace cpsdiag
