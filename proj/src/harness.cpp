#include "cpsdiag/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "cpsdiag/error.hpp"
#include "cpsdiag/graph_io.hpp"
#include "cpsdiag/residual_model.hpp"

namespace cpsdiag {

using nlohmann::json;

namespace {

HealthStateVector health(const CausalGraph& g, const SubsystemSet& symptomatic) {
    HealthStateVector h;
    for (const auto& n : g.nodes()) h.states[n] = symptomatic.count(n) > 0;
    return h;
}

Scenario make_scenario(std::string name, std::string description, std::vector<SubsystemId> nodes,
                       const std::vector<CausalGraph::Edge>& edges, const SubsystemSet& symptoms) {
    Scenario s;
    s.name = std::move(name);
    s.description = std::move(description);
    s.graph = CausalGraph(std::move(nodes), edges);
    s.health = health(s.graph, symptoms);
    return s;
}

std::string join(const SubsystemSet& s, char sep) {
    std::string out;
    for (const auto& x : s) {
        if (!out.empty()) out += sep;
        out += x;
    }
    return out;
}

std::string format_theta(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", t);
    return buf;
}

}  // namespace

const std::vector<Scenario>& canonical_scenarios() {
    static const std::vector<Scenario> scenarios = {
        make_scenario("acyclic_single", "chain A->B->C->D, one symptom cluster", {"A", "B", "C", "D"},
                      {{"A", "B"}, {"B", "C"}, {"C", "D"}}, {"B", "C", "D"}),
        make_scenario("acyclic_multi", "two independent chains, one symptom cluster each",
                      {"A", "B", "C", "X", "Y", "Z"},
                      {{"A", "B"}, {"B", "C"}, {"X", "Y"}, {"Y", "Z"}}, {"B", "C", "Y", "Z"}),
        make_scenario("cyclic_single", "ring A->B->C->D->A with chord A->C", {"A", "B", "C", "D"},
                      {{"A", "B"}, {"B", "C"}, {"C", "D"}, {"D", "A"}, {"A", "C"}}, {"B", "C"}),
        make_scenario("cyclic_multi", "two components with feedback loops, one cluster each",
                      {"P", "Q", "R", "S", "U", "V", "W"},
                      {{"P", "Q"}, {"Q", "R"}, {"R", "P"}, {"R", "S"}, {"U", "V"}, {"V", "U"}, {"V", "W"}},
                      {"Q", "R", "S", "V", "W"}),
    };
    return scenarios;
}

const Scenario& canonical_scenario(std::string_view name) {
    for (const auto& s : canonical_scenarios())
        if (s.name == name) return s;
    std::string known;
    for (const auto& s : canonical_scenarios()) known += (known.empty() ? "" : ", ") + s.name;
    throw ValidationError("unknown scenario '" + std::string(name) + "' (known: " + known + ")");
}

DiagnosisResult run_scenario(const CausalGraph& g, const HealthStateVector& h, const CriterionWeights& w,
                             double theta, const DiagnosisOptions& opts) {
    return diagnose(g, h, w, theta, opts);
}

std::vector<double> default_thetas() {
    std::vector<double> t;
    for (int i = 10; i >= 0; --i) t.push_back(i / 10.0);
    return t;
}

SweepResult theta_sweep(const CausalGraph& g, const HealthStateVector& h, const CriterionWeights& w,
                        std::span<const double> thetas, const DiagnosisOptions& opts) {
    if (thetas.empty()) throw ValidationError("theta list is empty");
    for (std::size_t i = 1; i < thetas.size(); ++i)
        if (!(thetas[i] < thetas[i - 1])) throw ValidationError("thetas must be strictly descending");
    SweepResult out;
    for (double theta : thetas) {
        const auto r = diagnose(g, h, w, theta, opts);
        if (!out.rows.empty() && r.root_causes == out.rows.back().root_causes) continue;
        SweepRow row{theta, r.root_causes, {}};
        if (out.rows.empty()) {
            row.newly_added = r.root_causes;
        } else {
            const auto& prev = out.rows.back().root_causes;
            std::set_difference(r.root_causes.begin(), r.root_causes.end(), prev.begin(), prev.end(),
                                std::inserter(row.newly_added, row.newly_added.end()));
            if (!std::includes(r.root_causes.begin(), r.root_causes.end(), prev.begin(), prev.end()))
                out.warnings.push_back("theta " + format_theta(theta) + " drops root causes selected at theta " +
                                       format_theta(out.rows.back().theta));
        }
        out.rows.push_back(std::move(row));
    }
    return out;
}

std::string sweep_to_csv(const SweepResult& s) {
    std::ostringstream os;
    os << "theta,root_causes,newly_added\n";
    for (const auto& r : s.rows)
        os << format_theta(r.theta) << ',' << join(r.root_causes, ';') << ',' << join(r.newly_added, ';') << '\n';
    return os.str();
}

json sweep_to_json(const SweepResult& s) {
    json rows = json::array();
    for (const auto& r : s.rows)
        rows.push_back({{"theta", r.theta}, {"root_causes", r.root_causes}, {"newly_added", r.newly_added}});
    return {{"rows", rows}, {"warnings", s.warnings}};
}

json run_experiment1(const CriterionWeights& w, std::span<const double> thetas, const DiagnosisOptions& opts) {
    json out = json::array();
    for (const auto& sc : canonical_scenarios()) {
        const auto sweep = theta_sweep(sc.graph, sc.health, w, thetas, opts);
        out.push_back({{"scenario", sc.name},
                       {"description", sc.description},
                       {"symptoms", sc.health.symptomatic()},
                       {"sweep", sweep_to_json(sweep)}});
    }
    return out;
}

std::string to_string(OutcomeCategory c) {
    switch (c) {
        case OutcomeCategory::missed_symptom: return "missed_symptom";
        case OutcomeCategory::missed_cause: return "missed_cause";
        case OutcomeCategory::no_reduction: return "no_reduction";
        case OutcomeCategory::reduced_set: return "reduced_set";
        case OutcomeCategory::perfect: return "perfect";
    }
    return "missed_symptom";
}

const std::vector<OutcomeCategory>& all_categories() {
    static const std::vector<OutcomeCategory> c = {OutcomeCategory::missed_symptom, OutcomeCategory::missed_cause,
                                                   OutcomeCategory::no_reduction, OutcomeCategory::reduced_set,
                                                   OutcomeCategory::perfect};
    return c;
}

OutcomeCategory classify(const SubsystemId& s_true, const SubsystemSet& s_sym, const SubsystemSet& s_causal) {
    if (!s_sym.count(s_true)) return OutcomeCategory::missed_symptom;
    if (!s_causal.count(s_true)) return OutcomeCategory::missed_cause;
    if (s_causal.size() >= s_sym.size()) return OutcomeCategory::no_reduction;
    if (s_causal.size() == 1) return OutcomeCategory::perfect;
    return OutcomeCategory::reduced_set;
}

SubsystemSet majority_symptoms(std::span<const HealthStateVector> windows) {
    std::map<SubsystemId, std::size_t> flagged;
    for (const auto& h : windows)
        for (const auto& [s, v] : h.states)
            if (v) ++flagged[s];
    SubsystemSet out;
    for (const auto& [s, c] : flagged)
        if (2 * c > windows.size()) out.insert(s);
    return out;
}

SubsystemSet incident_symptoms(std::span<const HealthStateVector> windows, std::int64_t start, std::int64_t end) {
    std::vector<HealthStateVector> inside;
    for (const auto& h : windows)
        if (h.timestamp >= start && h.timestamp < end) inside.push_back(h);
    return majority_symptoms(inside);
}

void Experiment2Config::validate() const {
    if (n_trials == 0) throw ValidationError("trial count must be positive");
    if (!(theta >= 0.0 && theta <= 1.0)) throw ValidationError("theta must lie in [0,1]");
    weights.validate();
    if (window_len == 0) throw ValidationError("window length must be positive");
    if (latent_dim == 0) throw ValidationError("latent dimension must be positive");
    if (!(percentile > 0.0 && percentile < 100.0)) throw ValidationError("percentile must lie in (0,100)");
    trial.validate();
}

TrialRecord run_trial(const Experiment2Config& cfg, std::size_t index) {
    TrialRecord rec;
    rec.index = index;
    rec.seed = derive_seed(cfg.seed, index);
    try {
        const auto d = make_trial(cfg.trial, rec.seed);
        rec.nodes = d.graph.size();
        rec.edges = d.graph.edge_count();
        rec.fault_scale = d.fault.scale;
        const auto model = fit_linear_subspace_model(d.train, d.map, cfg.window_len, cfg.latent_dim);
        const auto bin = calibrate_thresholds(model, d.calibration, BinarizationConfig::at_percentile(cfg.percentile),
                                              Execution::serial);
        const auto det = detect_series(model, bin, d.test, 1, Execution::serial);
        const auto s_sym = incident_symptoms(det.states, d.fault.start_time, d.fault.end_time);
        HealthStateVector h;
        for (const auto& n : d.graph.nodes()) h.states[n] = s_sym.count(n) > 0;
        h.timestamp = d.fault.start_time;
        DiagnosisOptions opts;
        opts.execution = Execution::serial;
        const auto r = diagnose(d.graph, h, cfg.weights, cfg.theta, opts);
        rec.outcome = {classify(d.fault.target, s_sym, r.root_causes), d.fault.target, s_sym, r.root_causes};
        rec.completed = true;
    } catch (const std::exception& e) {
        rec.error = e.what();
    }
    return rec;
}

Experiment2Report run_experiment2(const Experiment2Config& cfg) {
    cfg.validate();
    Experiment2Report rep;
    rep.config = cfg;
    rep.trials.resize(cfg.n_trials);
    const auto n = static_cast<std::ptrdiff_t>(cfg.n_trials);
    if (cfg.execution == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (std::ptrdiff_t i = 0; i < n; ++i)
            rep.trials[static_cast<std::size_t>(i)] = run_trial(cfg, static_cast<std::size_t>(i));
    } else {
        for (std::ptrdiff_t i = 0; i < n; ++i)
            rep.trials[static_cast<std::size_t>(i)] = run_trial(cfg, static_cast<std::size_t>(i));
    }
    for (auto c : all_categories()) rep.counts[c] = 0;
    std::size_t included = 0, reduced = 0;
    for (const auto& t : rep.trials) {
        if (!t.completed) continue;
        ++rep.completed;
        ++rep.counts[t.outcome.category];
        const auto c = t.outcome.category;
        if (c == OutcomeCategory::no_reduction || c == OutcomeCategory::reduced_set || c == OutcomeCategory::perfect)
            ++included;
        if (c == OutcomeCategory::reduced_set || c == OutcomeCategory::perfect) ++reduced;
    }
    if (rep.completed > 0) {
        rep.inclusion_rate = static_cast<double>(included) / static_cast<double>(rep.completed);
        rep.reduction_rate = static_cast<double>(reduced) / static_cast<double>(rep.completed);
    }
    return rep;
}

std::string Experiment2Report::summary() const {
    std::ostringstream os;
    os << "completed " << completed << "/" << trials.size();
    for (auto c : all_categories()) {
        const auto it = counts.find(c);
        os << ", " << to_string(c) << " " << (it == counts.end() ? 0 : it->second);
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, ", inclusion %.3f, reduction %.3f", inclusion_rate, reduction_rate);
    os << buf;
    return os.str();
}

json experiment2_to_json(const Experiment2Report& r) {
    json trials = json::array();
    for (const auto& t : r.trials) {
        json j = {{"index", t.index}, {"seed", t.seed}, {"completed", t.completed}};
        if (t.completed) {
            j["category"] = to_string(t.outcome.category);
            j["s_true"] = t.outcome.s_true;
            j["s_sym"] = t.outcome.s_sym;
            j["s_causal"] = t.outcome.s_causal;
            j["sizes"] = {{"s_sym", t.outcome.s_sym.size()}, {"s_causal", t.outcome.s_causal.size()}};
            j["nodes"] = t.nodes;
            j["edges"] = t.edges;
            j["fault_scale"] = t.fault_scale;
        } else {
            j["error"] = t.error;
        }
        trials.push_back(std::move(j));
    }
    json agg = json::object();
    for (const auto& [c, n] : r.counts) agg[to_string(c)] = n;
    agg["completed"] = r.completed;
    agg["failed"] = r.trials.size() - r.completed;
    agg["inclusion_rate"] = r.inclusion_rate;
    agg["reduction_rate"] = r.reduction_rate;
    const auto& c = r.config;
    return {{"config",
             {{"n_trials", c.n_trials},
              {"seed", c.seed},
              {"theta", c.theta},
              {"weights", weights_to_json(c.weights)},
              {"window_len", c.window_len},
              {"latent_dim", c.latent_dim},
              {"percentile", c.percentile},
              {"trial", trial_config_to_json(c.trial)}}},
            {"aggregate", agg},
            {"trials", trials}};
}

DetectionReport run_detection_study(const DetectionConfig& cfg) {
    cfg.trial.validate();
    if (cfg.n_trials == 0) throw ValidationError("trial count must be positive");
    DetectionReport rep;
    rep.trials.resize(cfg.n_trials);
    const auto n = static_cast<std::ptrdiff_t>(cfg.n_trials);
    auto one = [&](std::size_t i) {
        DetectionRecord rec;
        rec.index = i;
        try {
            const auto d = make_trial(cfg.trial, derive_seed(cfg.seed, i));
            const auto model = fit_linear_subspace_model(d.train, d.map, cfg.window_len, cfg.latent_dim);
            const auto fault_bin = calibrate_thresholds(
                model, d.calibration, BinarizationConfig::at_percentile(cfg.fault_percentile), Execution::serial);
            const auto det = detect_series(model, fault_bin, d.test, 1, Execution::serial);
            rec.target = d.fault.target;
            rec.target_flagged = incident_symptoms(det.states, d.fault.start_time, d.fault.end_time).count(rec.target) > 0;
            const auto nominal_bin = calibrate_thresholds(
                model, d.calibration, BinarizationConfig::at_percentile(cfg.nominal_percentile), Execution::serial);
            const auto nominal = detect_series(model, nominal_bin, d.validation, 1, Execution::serial);
            rec.nominal_windows = nominal.states.size();
            rec.subsystems = d.graph.size();
            for (const auto& h : nominal.states)
                for (const auto& [s, v] : h.states) rec.nominal_flags += v ? 1 : 0;
            rec.completed = true;
        } catch (const std::exception& e) {
            rec.error = e.what();
        }
        rep.trials[i] = std::move(rec);
    };
    if (cfg.execution == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (std::ptrdiff_t i = 0; i < n; ++i) one(static_cast<std::size_t>(i));
    } else {
        for (std::ptrdiff_t i = 0; i < n; ++i) one(static_cast<std::size_t>(i));
    }
    std::size_t detected = 0, flags = 0, cells = 0;
    for (const auto& t : rep.trials) {
        if (!t.completed) continue;
        ++rep.completed;
        detected += t.target_flagged ? 1 : 0;
        flags += t.nominal_flags;
        cells += t.nominal_windows * t.subsystems;
    }
    if (rep.completed > 0) rep.detection_rate = static_cast<double>(detected) / static_cast<double>(rep.completed);
    if (cells > 0) rep.false_flag_rate = static_cast<double>(flags) / static_cast<double>(cells);
    return rep;
}

}  // namespace cpsdiag
