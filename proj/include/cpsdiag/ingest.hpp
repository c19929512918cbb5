#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpsdiag/binarization.hpp"
#include "cpsdiag/diagnosis.hpp"
#include "cpsdiag/residual_model.hpp"
#include "cpsdiag/telemetry.hpp"

namespace cpsdiag {

// The first capture group of the first match names the stage: "FIT101" -> "P1".
inline constexpr const char* kDefaultStagePattern = "([0-9])[0-9]{2}";

SubsystemSignalsMap auto_map_signals(const std::vector<std::string>& signal_names,
                                     const std::string& pattern = kDefaultStagePattern);

struct AttackAnnotation {
    std::string id;
    SubsystemSet subsystems;
    std::int64_t start_time = 0;
    std::int64_t end_time = 0;
};

// [{"id": "...", "subsystems": ["P1"], "start": t0, "end": t1}]; times are
// integers or ISO-8601 strings.
std::vector<AttackAnnotation> attacks_from_json(const nlohmann::json& j);
std::vector<AttackAnnotation> load_attacks(const std::filesystem::path& path);

struct EvaluationWindow {
    AttackAnnotation attack;
    std::size_t first_row = 0;  // rows of the telemetry inside [start, end)
    std::size_t row_count = 0;
};

struct AnnotatedRun {
    TimeSeriesFrame telemetry;
    std::vector<EvaluationWindow> windows;  // annotation order
};

// Checks the map against the graph and the telemetry, and every annotation
// against both.
AnnotatedRun load_annotated_run(const std::filesystem::path& telemetry_csv,
                                const std::filesystem::path& attacks_json,
                                const SubsystemSignalsMap& map, const CausalGraph& graph);
AnnotatedRun make_annotated_run(TimeSeriesFrame telemetry, const std::vector<AttackAnnotation>& attacks,
                                const SubsystemSignalsMap& map, const CausalGraph& graph);

struct Preset {
    std::string name;
    CriterionWeights weights;
    BinarizationConfig binarization;
    double theta = 0.9;
};

Preset swat_preset();
Preset preset_by_name(std::string_view name);

// The 51 signal names of the six-stage water treatment testbed.
const std::vector<std::string>& swat_signal_names();

struct EvaluationRow {
    std::string attack;
    SubsystemSet attacked;
    SubsystemSet symptoms;
    SubsystemSet candidates;
};

// Majority-vote symptoms over windows ending inside each attack interval,
// then one diagnosis per attack.
std::vector<EvaluationRow> evaluate_run(const AnnotatedRun& run, const ResidualModel& model,
                                        const BinarizationConfig& cfg, const CausalGraph& graph,
                                        const CriterionWeights& w, double theta,
                                        Execution exec = Execution::parallel);

// Columns: attack, attacked_subsystems, symptoms, diagnosis_candidates.
std::string evaluation_to_csv(const std::vector<EvaluationRow>& rows);
nlohmann::json evaluation_to_json(const std::vector<EvaluationRow>& rows);

}  // namespace cpsdiag
