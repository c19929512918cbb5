#include "cpsdiag/ingest.hpp"

#include <algorithm>
#include <regex>
#include <sstream>

#include "cpsdiag/error.hpp"
#include "cpsdiag/graph_io.hpp"
#include "cpsdiag/harness.hpp"

namespace cpsdiag {

using nlohmann::json;

SubsystemSignalsMap auto_map_signals(const std::vector<std::string>& signal_names, const std::string& pattern) {
    std::regex re;
    try {
        re = std::regex(pattern);
    } catch (const std::regex_error& e) {
        throw ValidationError("invalid stage pattern '" + pattern + "': " + e.what());
    }
    if (re.mark_count() < 1) throw ValidationError("stage pattern needs a capture group");
    SubsystemSignalsMap::Assignments a;
    std::vector<std::string> bad;
    for (const auto& name : signal_names) {
        std::smatch m;
        if (!std::regex_search(name, m, re) || m[1].length() == 0) {
            bad.push_back(name);
            continue;
        }
        a["P" + m[1].str()].push_back(name);
    }
    if (!bad.empty()) {
        std::string list;
        for (const auto& b : bad) list += (list.empty() ? "" : ", ") + b;
        throw ValidationError("signal names without a stage code: " + list);
    }
    if (a.empty()) throw ValidationError("no signals to map");
    return SubsystemSignalsMap(std::move(a));
}

namespace {

std::int64_t time_field(const json& j, const char* key, std::size_t index) {
    const auto& v = j.at(key);
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_string()) return parse_timestamp(v.get<std::string>());
    throw ValidationError("attacks[" + std::to_string(index) + "]." + key + ": expected an integer or ISO-8601 time");
}

}  // namespace

std::vector<AttackAnnotation> attacks_from_json(const json& j) {
    if (!j.is_array()) throw ValidationError("attacks: expected a JSON array");
    std::vector<AttackAnnotation> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto& e = j[i];
        const std::string where = "attacks[" + std::to_string(i) + "]";
        if (!e.is_object()) throw ValidationError(where + ": expected an object");
        for (const auto& [key, value] : e.items())
            if (key != "id" && key != "subsystems" && key != "start" && key != "end")
                throw ValidationError(where + ": unknown key '" + key + "'");
        for (const char* key : {"id", "subsystems", "start", "end"})
            if (!e.contains(key)) throw ValidationError(where + ": missing '" + key + "'");
        AttackAnnotation a;
        try {
            a.id = e["id"].is_string() ? e["id"].get<std::string>() : e["id"].dump();
            for (const auto& s : e["subsystems"]) a.subsystems.insert(s.get<std::string>());
        } catch (const json::exception& ex) {
            throw ValidationError(where + ": " + ex.what());
        }
        a.start_time = time_field(e, "start", i);
        a.end_time = time_field(e, "end", i);
        if (a.subsystems.empty()) throw ValidationError(where + ": 'subsystems' is empty");
        if (a.start_time >= a.end_time) throw ValidationError(where + ": start must precede end");
        out.push_back(std::move(a));
    }
    return out;
}

std::vector<AttackAnnotation> load_attacks(const std::filesystem::path& path) {
    try {
        return attacks_from_json(read_json_file(path));
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

AnnotatedRun make_annotated_run(TimeSeriesFrame telemetry, const std::vector<AttackAnnotation>& attacks,
                                const SubsystemSignalsMap& map, const CausalGraph& graph) {
    map.check_covers(graph);
    map.check_signals(telemetry.signal_names);
    telemetry.validate();
    if (telemetry.rows() == 0) throw ValidationError("telemetry has no rows");
    AnnotatedRun run;
    const auto first = telemetry.timestamps.front();
    const auto last = telemetry.timestamps.back();
    for (const auto& a : attacks) {
        for (const auto& s : a.subsystems)
            if (!graph.contains(s))
                throw ValidationError("attack '" + a.id + "' names subsystem '" + s + "', which is not in the graph");
        if (a.start_time < first || a.end_time > last + 1)
            throw ValidationError("attack '" + a.id + "' interval [" + std::to_string(a.start_time) + ", " +
                                  std::to_string(a.end_time) + ") lies outside the telemetry range [" +
                                  std::to_string(first) + ", " + std::to_string(last) + "]");
        const auto lo = std::lower_bound(telemetry.timestamps.begin(), telemetry.timestamps.end(), a.start_time);
        const auto hi = std::lower_bound(telemetry.timestamps.begin(), telemetry.timestamps.end(), a.end_time);
        EvaluationWindow w;
        w.attack = a;
        w.first_row = static_cast<std::size_t>(lo - telemetry.timestamps.begin());
        w.row_count = static_cast<std::size_t>(hi - lo);
        run.windows.push_back(std::move(w));
    }
    run.telemetry = std::move(telemetry);
    return run;
}

AnnotatedRun load_annotated_run(const std::filesystem::path& telemetry_csv, const std::filesystem::path& attacks_json,
                                const SubsystemSignalsMap& map, const CausalGraph& graph) {
    return make_annotated_run(read_csv(telemetry_csv), load_attacks(attacks_json), map, graph);
}

Preset swat_preset() {
    Preset p;
    p.name = "swat";
    p.weights = CriterionWeights{0.2, 0.2, 0.4, 0.2};
    p.binarization = BinarizationConfig::at_percentile(99.0, 5);
    p.theta = 0.9;
    return p;
}

Preset preset_by_name(std::string_view name) {
    if (name == "swat") return swat_preset();
    throw ValidationError("unknown preset '" + std::string(name) + "' (known: swat)");
}

const std::vector<std::string>& swat_signal_names() {
    static const std::vector<std::string> names = {
        "FIT101", "LIT101", "MV101",  "P101",   "P102",   "AIT201", "AIT202", "AIT203", "FIT201",
        "MV201",  "P201",   "P202",   "P203",   "P204",   "P205",   "P206",   "DPIT301", "FIT301",
        "LIT301", "MV301",  "MV302",  "MV303",  "MV304",  "P301",   "P302",   "AIT401", "AIT402",
        "FIT401", "LIT401", "P401",   "P402",   "P403",   "P404",   "UV401",  "AIT501", "AIT502",
        "AIT503", "AIT504", "FIT501", "FIT502", "FIT503", "FIT504", "P501",   "P502",   "PIT501",
        "PIT502", "PIT503", "FIT601", "P601",   "P602",   "P603",
    };
    return names;
}

std::vector<EvaluationRow> evaluate_run(const AnnotatedRun& run, const ResidualModel& model,
                                        const BinarizationConfig& cfg, const CausalGraph& graph,
                                        const CriterionWeights& w, double theta, Execution exec) {
    const auto det = detect_series(model, cfg, run.telemetry, 1, exec);
    DiagnosisOptions opts;
    opts.execution = exec;
    std::vector<EvaluationRow> rows;
    for (const auto& win : run.windows) {
        EvaluationRow row;
        row.attack = win.attack.id;
        row.attacked = win.attack.subsystems;
        row.symptoms = incident_symptoms(det.states, win.attack.start_time, win.attack.end_time);
        HealthStateVector h;
        h.timestamp = win.attack.start_time;
        for (const auto& n : graph.nodes()) h.states[n] = row.symptoms.count(n) > 0;
        row.candidates = diagnose(graph, h, w, theta, opts).root_causes;
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

std::string join(const SubsystemSet& s) {
    std::string out;
    for (const auto& x : s) out += (out.empty() ? "" : ";") + x;
    return out;
}

}  // namespace

std::string evaluation_to_csv(const std::vector<EvaluationRow>& rows) {
    std::ostringstream os;
    os << "attack,attacked_subsystems,symptoms,diagnosis_candidates\n";
    for (const auto& r : rows)
        os << r.attack << ',' << join(r.attacked) << ',' << join(r.symptoms) << ',' << join(r.candidates) << '\n';
    return os.str();
}

json evaluation_to_json(const std::vector<EvaluationRow>& rows) {
    json out = json::array();
    for (const auto& r : rows)
        out.push_back({{"attack", r.attack},
                       {"attacked_subsystems", r.attacked},
                       {"symptoms", r.symptoms},
                       {"diagnosis_candidates", r.candidates}});
    return out;
}

}  // namespace cpsdiag
